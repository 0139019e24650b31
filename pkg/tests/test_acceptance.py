"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run as `pytest tests/test_acceptance.py -v -s` to see the per-criterion
lines; tolerances and runtime budgets are asserted inside the tests.
"""

import functools
import time

import numpy as np
import pytest

import riemcond as rc

DEFAULT_Y = np.array([0.35, -0.2, 0.4])


def criterion(num, desc, budget_s=None):
    def deco(fn):
        @functools.wraps(fn)
        def wrapper(*args, **kwargs):
            start = time.monotonic()
            try:
                fn(*args, **kwargs)
            except BaseException:
                print(f"[FAIL] criterion {num}: {desc}")
                raise
            elapsed = time.monotonic() - start
            if budget_s is not None:
                assert elapsed < budget_s, f"criterion {num} took {elapsed:.1f}s"
            print(f"[PASS] criterion {num}: {desc} ({elapsed:.2f}s)")

        return wrapper

    return deco


@criterion(1, "parabola oracle kappa = 1/|1-2t|", budget_s=1.0)
def test_criterion_1_parabola_oracle():
    p = rc.graph2d(1.0)
    for t in (0.0, 0.1, 0.25, 0.4, 0.49, 0.51, 1.0):
        wd = rc.weingarten_data(p, [0.0], [0.0, t])
        rep = rc.kappa_cpp(wd.H)
        expected = 1.0 / abs(1.0 - 2.0 * t)
        assert abs(rep.kappa - expected) <= 1e-9 * expected
    wd_focal = rc.weingarten_data(p, [0.0], [0.0, 0.5])
    assert rc.kappa_cpp(wd_focal.H).ill_posed


@criterion(2, "sphere oracle kappa = 1/alpha and center certificate", budget_s=1.0)
def test_criterion_2_sphere_oracle():
    s = rc.sphere(1.0)
    u0 = np.array([0.3, -0.2])
    x = s(u0)
    for alpha in (0.2, 0.5, 2.0, 10.0):
        wd = rc.weingarten_data(s, u0, alpha * x - x)
        rep = rc.kappa_cpp(wd.H)
        assert abs(rep.kappa - 1.0 / alpha) <= 1e-9 / alpha
    # alpha -> 0: the center is ill-posed ...
    wd_center = rc.weingarten_data(s, u0, -x)
    assert rc.kappa_cpp(wd_center.H).ill_posed
    # ... and the certificate along the outward unit normal lists offset -1
    wd_out = rc.weingarten_data(s, u0, x / np.linalg.norm(x))
    offsets = rc.ill_posedness_certificate(rc.principal_curvatures(wd_out))
    np.testing.assert_allclose(offsets, [-1.0], atol=1e-9)


@criterion(3, "two-path equality sigma vs curvature form, 500 instances")
def test_criterion_3_two_path_equality():
    rng = np.random.default_rng(100)
    checked = 0
    for _ in range(500):
        m = int(rng.integers(1, 7))
        c = rng.standard_normal(m) * rng.uniform(0.1, 3.0)
        t = abs(rng.standard_normal()) * rng.uniform(0.0, 2.0)
        V = np.linalg.qr(rng.standard_normal((m, m)))[0]
        H = np.eye(m) - V @ np.diag(c * t) @ V.T
        k_sigma = rc.kappa_cpp(H).kappa
        k_curv = rc.kappa_cpp_curvatures(c, t)
        assert np.isfinite(k_sigma) == np.isfinite(k_curv)
        if np.isfinite(k_sigma):
            assert abs(k_sigma - k_curv) <= 1e-10 * k_curv
            checked += 1
    assert checked >= 450


@criterion(4, "eta = 0 collapse to the idealized condition number, 50 rigs")
def test_criterion_4_on_manifold_collapse():
    rng = np.random.default_rng(101)
    done = 0
    attempt = 0
    while done < 50:
        attempt += 1
        spec = rc.RigSpec(
            k=int(rng.integers(2, 11)),
            radius=float(rng.uniform(3.0, 8.0)),
            arc_degrees=float(rng.uniform(30.0, 90.0)),
            seed=attempt,
            focal=float(rng.uniform(0.5, 2.0)),
        )
        rig = rc.gen_rig(spec)
        y = rng.uniform(-0.6, 0.6, size=3)
        if not rc.mv_domain_check(rig, y):
            continue
        rep = rc.mv_kappa(rig, y, np.zeros(2 * spec.k))
        R = np.linalg.qr(rc.mv_jacobian(rig, y))[1]
        sigma3 = np.linalg.svd(R)[1][2]
        assert abs(rep.kappa - 1.0 / sigma3) <= 1e-12 / sigma3
        assert abs(rep.bounds_lo - rep.kappa) <= 1e-12 * rep.kappa
        assert abs(rep.bounds_hi - rep.kappa) <= 1e-12 * rep.kappa
        done += 1


def _hundred_instances():
    rng = np.random.default_rng(102)
    instances = []
    attempt = 0
    while len(instances) < 100:
        attempt += 1
        spec = rc.RigSpec(
            k=int(rng.integers(2, 11)),
            radius=float(rng.uniform(3.0, 8.0)),
            arc_degrees=float(rng.uniform(30.0, 80.0)),
            seed=1000 + attempt,
            focal=float(rng.uniform(0.6, 1.8)),
        )
        rig = rc.gen_rig(spec)
        y = rng.uniform(-0.5, 0.5, size=3)
        if not rc.mv_domain_check(rig, y):
            continue
        scale = float(rng.uniform(0.05, 2.0))
        eta = scale * rc.random_unit_normal(rig, y, attempt)
        instances.append((rig, y, eta))
    return instances


@criterion(5, "FD vs closed-form Weingarten on 100 rig instances", budget_s=10.0)
def test_criterion_5_fd_vs_analytic():
    for rig, y, eta in _hundred_instances():
        _, R, _, S = rc.mv_weingarten(rig, y, eta)
        pm = rc.as_parametrization(rig)
        S_fd = rc.weingarten(rc.second_fundamental_contraction(pm, y, eta), R)
        assert np.linalg.norm(S - S_fd) / max(1.0, np.linalg.norm(S)) <= 1e-5


@criterion(6, "mv_kappa equals kappa_gcpp(A = R^-1, H = I - S) on the same instances")
def test_criterion_6_cross_module_equality():
    for rig, y, eta in _hundred_instances():
        _, R, _, S = rc.mv_weingarten(rig, y, eta)
        rep_mv = rc.mv_kappa(rig, y, eta)
        A = np.linalg.solve(R, np.eye(3))
        rep_gcpp = rc.kappa_gcpp(rc.ProblemDerivative(A=A), np.eye(3) - S)
        assert rep_mv.ill_posed == rep_gcpp.ill_posed
        if not rep_mv.ill_posed:
            assert abs(rep_mv.kappa - rep_gcpp.kappa) <= 1e-10 * rep_gcpp.kappa


@criterion(7, "curvature sandwich brackets kappa_gcpp, 1000 instances")
def test_criterion_7_sandwich_bounds():
    rng = np.random.default_rng(103)
    for _ in range(1000):
        m = int(rng.integers(1, 5))
        p = int(rng.integers(1, 5))
        A = rng.standard_normal((p, m))
        V = np.linalg.qr(rng.standard_normal((m, m)))[0]
        c = rng.standard_normal(m)
        t = abs(rng.standard_normal())
        H = np.eye(m) - V @ np.diag(c * t) @ V.T
        rep = rc.kappa_gcpp(rc.ProblemDerivative(A=A), H)
        kappa_S = np.linalg.svd(A)[1][0]
        lo, hi = rc.kappa_bounds(kappa_S, c, t)
        if np.isfinite(rep.kappa) and np.isfinite(hi):
            assert lo <= rep.kappa * (1.0 + 1e-12)
            assert rep.kappa <= hi * (1.0 + 1e-12)
    # equality when the Weingarten map is a multiple of the identity
    for _ in range(100):
        m, p = int(rng.integers(1, 5)), int(rng.integers(1, 5))
        A = rng.standard_normal((p, m))
        c0 = float(rng.uniform(-2.0, 2.0))
        t = float(rng.uniform(0.0, 0.45))
        if abs(1.0 - c0 * t) < 1e-3:
            continue
        rep = rc.kappa_gcpp(rc.ProblemDerivative(A=A), (1.0 - c0 * t) * np.eye(m))
        kappa_S = np.linalg.svd(A)[1][0]
        lo, hi = rc.kappa_bounds(kappa_S, c0 * np.ones(m), t)
        assert abs(lo - hi) <= 1e-10 * hi
        assert abs(rep.kappa - hi) <= 1e-10 * hi


@criterion(8, "experiment-1 analog: ratio means in [0.95, 1.05], small-t in [0.99, 1.01]",
           budget_s=60.0)
def test_criterion_8_experiment_1_analog():
    rig = rc.gen_rig(rc.RigSpec(k=10, seed=0))
    eta = rc.random_unit_normal(rig, DEFAULT_Y, 0)
    grid = rc.log_grid(-3, 1, 100, two_sided=False)
    records = rc.experiment_validate(rig, DEFAULT_Y, eta, grid, perturb_rel=1e-6)
    arith, geo, excluded = rc.ratio_stats(records)
    assert 0.95 <= arith <= 1.05
    assert 0.95 <= geo <= 1.05
    small = [r for r in records if abs(r.t_rel) <= 1e-2 * (1 + 1e-12)]
    assert len(small) >= 25
    for rec in small:
        assert rec.ratio is not None and not rec.flagged
        assert 0.99 <= rec.ratio <= 1.01


@criterion(9, "experiment-2 analog: <= 3 dips per sign, kappa(0) monotone in k, CSV deterministic",
           budget_s=60.0)
def test_criterion_9_experiment_2_analog():
    rig10 = rc.gen_rig(rc.RigSpec(k=10, seed=0))
    grid = rc.log_grid(-3, 4, 300)
    kappas_at_zero = []
    for k in (2, 3, 5, 10):
        rig_k = rc.prefix_rig(rig10, k)
        eta_k = rc.random_unit_normal(rig_k, DEFAULT_Y, 0)
        records = rc.experiment_sweep(rig_k, DEFAULT_Y, eta_k, grid)
        t = np.array([r.t_rel for r in records])
        sig = np.array([r.sigma3 for r in records])
        for sign in (-1, 1):
            dips = rc.detect_dips(sig[np.sign(t) == sign])
            assert len(dips) <= 3
        kappas_at_zero.append(rc.mv_kappa(rig_k, DEFAULT_Y, np.zeros(2 * k)).kappa)
        if k == 10:
            again = rc.experiment_sweep(rig_k, DEFAULT_Y, eta_k, grid)
            assert rc.records_to_csv(records) == rc.records_to_csv(again)
    assert all(b <= a * (1.0 + 1e-13) for a, b in zip(kappas_at_zero, kappas_at_zero[1:]))


@criterion(10, "triangulation round trip and noisy refinement, 1000 correspondences",
           budget_s=30.0)
def test_criterion_10_triangulation_round_trip():
    rng = np.random.default_rng(104)
    rigs = [rc.gen_rig(rc.RigSpec(k=k, seed=s)) for k, s in ((4, 5), (7, 6), (10, 7))]
    done = 0
    while done < 1000:
        rig = rigs[done % len(rigs)]
        y = rng.uniform(-0.7, 0.7, size=3)
        if not rc.mv_domain_check(rig, y):
            continue
        x = rc.mv_project(rig, y)
        y_lin = rc.triangulate_linear(rig, x)
        assert np.linalg.norm(y_lin - y) <= 1e-9 * (1.0 + np.linalg.norm(y))
        noise = rng.standard_normal(x.size)
        a = x + 1e-4 * noise / np.linalg.norm(noise)
        y0 = rc.triangulate_linear(rig, a)
        res0 = np.linalg.norm(rc.mv_project(rig, y0) - a)
        refined = rc.triangulate(rig, a)
        assert refined.residual_norm < res0
        cert = rc.mv_certificate(rig, refined.u_star, a)
        assert cert <= 1e-8 * (1.0 + np.linalg.norm(a))
        done += 1
