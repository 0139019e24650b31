import numpy as np
import pytest

import riemcond as rc

DEFAULT_Y = np.array([0.35, -0.2, 0.4])


def _default_rig():
    return rc.gen_rig(rc.RigSpec())


def _affine_rig():
    P1 = np.array([[1.0, 0, 0, 0], [0, 1.0, 0, 0], [0, 0, 0, 1.0]])
    P2 = np.array([[1.0, 0, 1.0, 0], [0, 1.0, 0, 0], [0, 0, 0, 1.0]])
    return rc.CameraRig(cameras=(rc.Camera.from_matrix(P1), rc.Camera.from_matrix(P2)))


def test_gen_rig_deterministic_in_seed():
    a = rc.gen_rig(rc.RigSpec(k=6, seed=123))
    b = rc.gen_rig(rc.RigSpec(k=6, seed=123))
    for cam_a, cam_b in zip(a.cameras, b.cameras):
        np.testing.assert_array_equal(cam_a.matrix, cam_b.matrix)
    c = rc.gen_rig(rc.RigSpec(k=6, seed=124))
    assert any(
        not np.array_equal(x.matrix, y.matrix) for x, y in zip(a.cameras, c.cameras)
    )


def test_gen_rig_two_camera_baseline_length():
    spec = rc.RigSpec(k=2, radius=3.0, arc_degrees=30.0, seed=5)
    rig = rc.gen_rig(spec)
    c0, c1 = rig.cameras[0].center(), rig.cameras[1].center()
    expected = 2.0 * spec.radius * np.sin(np.radians(15.0))
    assert abs(np.linalg.norm(c1 - c0) - expected) <= 1e-12


def test_gen_rig_all_cameras_see_target():
    spec = rc.RigSpec(k=10, seed=2)
    rig = rc.gen_rig(spec)
    look = np.asarray(spec.look_at)
    depths = [cam.c @ look + cam.d for cam in rig.cameras]
    assert all(d > 0 for d in depths)
    assert rc.mv_domain_check(rig, look + np.array([0.01, -0.02, 0.03]))


def test_rig_spec_validation():
    with pytest.raises(rc.InvalidGeometry):
        rc.RigSpec(k=1)
    with pytest.raises(rc.InvalidGeometry):
        rc.RigSpec(radius=-2.0)


def test_random_unit_normal_contract():
    rig = _default_rig()
    eta = rc.random_unit_normal(rig, DEFAULT_Y, 11)
    assert abs(np.linalg.norm(eta) - 1.0) <= 1e-12
    Q = np.linalg.qr(rc.mv_jacobian(rig, DEFAULT_Y))[0]
    assert np.linalg.norm(Q.T @ eta) <= 1e-10


def test_random_unit_normal_dimension_effects():
    rig2 = rc.gen_rig(rc.RigSpec(k=2, seed=3))
    y = np.array([0.1, 0.05, -0.2])
    e1 = rc.random_unit_normal(rig2, y, 0)
    e2 = rc.random_unit_normal(rig2, y, 99)
    # r=2: the normal space is 1-dimensional, so directions agree up to sign
    assert abs(abs(e1 @ e2) - 1.0) <= 1e-12
    rig10 = rc.gen_rig(rc.RigSpec(k=10, seed=3))
    f1 = rc.random_unit_normal(rig10, y, 0)
    f2 = rc.random_unit_normal(rig10, y, 99)
    assert abs(f1 @ f2) < 0.999


def test_log_grid_shapes():
    g = rc.log_grid(-3, 2, 100)
    assert g.size == 200
    assert np.all(np.diff(g) > 0)
    g1 = rc.log_grid(-3, 2, 100, two_sided=False)
    assert g1.size == 100 and g1[0] == pytest.approx(1e-3) and g1[-1] == pytest.approx(100.0)


def test_sweep_at_zero_offset_collapses():
    rig = _default_rig()
    eta = rc.random_unit_normal(rig, DEFAULT_Y, 0)
    (rec,) = rc.experiment_sweep(rig, DEFAULT_Y, eta, [0.0])
    R = np.linalg.qr(rc.mv_jacobian(rig, DEFAULT_Y))[1]
    sigma3 = np.linalg.svd(R)[1][2]
    assert rec.kappa == pytest.approx(1.0 / sigma3, rel=1e-12)
    assert rec.bounds[0] == pytest.approx(rec.kappa, rel=1e-12)
    assert rec.bounds[1] == pytest.approx(rec.kappa, rel=1e-12)
    assert not rec.ill_posed


def test_sweep_affine_rig_constant_kappa():
    rig = _affine_rig()
    y = np.array([0.2, -0.1, 0.4])
    eta = rc.random_unit_normal(rig, y, 1)
    recs = rc.experiment_sweep(rig, y, eta, rc.log_grid(-3, 3, 40))
    kappas = np.array([r.kappa for r in recs])
    assert np.abs(kappas - kappas[0]).max() <= 1e-12 * kappas[0]


def test_sweep_matches_mv_kappa_rows():
    rig = _default_rig()
    eta = rc.random_unit_normal(rig, DEFAULT_Y, 0)
    grid = rc.log_grid(-2, 1, 7)
    recs = rc.experiment_sweep(rig, DEFAULT_Y, eta, grid)
    x_norm = np.linalg.norm(rc.mv_project(rig, DEFAULT_Y))
    for t, rec in zip(grid, recs):
        rep = rc.mv_kappa(rig, DEFAULT_Y, t * x_norm * eta)
        assert rec.kappa == pytest.approx(rep.kappa, rel=1e-12)


def test_small_offset_band_keeps_kappa_flat():
    # curvature hardly affects the condition number for |t| <= 1e-2 ||x||
    rig = _default_rig()
    eta = rc.random_unit_normal(rig, DEFAULT_Y, 0)
    grid = rc.log_grid(-3, -2, 25)
    recs = rc.experiment_sweep(rig, DEFAULT_Y, eta, grid)
    (rec0,) = rc.experiment_sweep(rig, DEFAULT_Y, eta, [0.0])
    for rec in recs:
        assert abs(rec.kappa / rec0.kappa - 1.0) <= 0.05


def test_singular_offsets_align_with_sweep_dips():
    rig10 = _default_rig()
    grid = rc.log_grid(-3, 4, 300)
    for k in (2, 3, 5, 10):
        rig = rc.prefix_rig(rig10, k)
        eta = rc.random_unit_normal(rig, DEFAULT_Y, 0)
        offsets = rc.singular_offsets_rel(rig, DEFAULT_Y, eta)
        recs = rc.experiment_sweep(rig, DEFAULT_Y, eta, grid)
        sig = np.array([r.sigma3 for r in recs])
        t = np.array([r.t_rel for r in recs])
        for sign in (-1, 1):
            mask = np.sign(t) == sign
            dips = rc.detect_dips(sig[mask])
            assert len(dips) <= 3
            t_side = t[mask]
            for off in offsets:
                if np.sign(off) != sign or not (
                    abs(t_side).min() <= abs(off) <= abs(t_side).max()
                ):
                    continue
                # some detected dip lies within a few grid steps of the offset
                gaps = [abs(np.log10(abs(t_side[i])) - np.log10(abs(off))) for i in dips]
                step = np.log10(abs(t_side[1])) - np.log10(abs(t_side[0]))
                assert min(gaps) <= 2.5 * abs(step)


def test_validate_ratios_and_consistency():
    rig = _default_rig()
    eta = rc.random_unit_normal(rig, DEFAULT_Y, 0)
    grid = rc.log_grid(-3, 0, 12, two_sided=False)
    vrecs = rc.experiment_validate(rig, DEFAULT_Y, eta, grid)
    srecs = rc.experiment_sweep(rig, DEFAULT_Y, eta, grid)
    for v, s in zip(vrecs, srecs):
        assert v.kappa == pytest.approx(s.kappa, rel=1e-12)
        assert v.kappa_est is not None and v.ratio is not None
        assert v.ratio == pytest.approx(1.0, abs=2e-2)
    arith, geo, excluded = rc.ratio_stats(vrecs)
    assert excluded == 0
    assert 0.95 <= arith <= 1.05 and 0.95 <= geo <= 1.05


def test_ratio_stats_examples():
    def rec(ratio, flagged=False):
        return rc.SweepRecord(
            t_rel=0.0, kappa=1.0, bounds=(1.0, 1.0), sigma3=1.0, ill_posed=False,
            kappa_est=1.0, ratio=ratio, flagged=flagged,
        )

    arith, geo, excl = rc.ratio_stats([rec(1.0), rec(1.0)])
    assert (arith, geo, excl) == (1.0, 1.0, 0)
    arith, geo, excl = rc.ratio_stats([rec(2.0), rec(0.5)])
    assert arith == pytest.approx(1.25) and geo == pytest.approx(1.0) and excl == 0
    arith, geo, excl = rc.ratio_stats([rec(1.0), rec(100.0, flagged=True)])
    assert arith == pytest.approx(1.0) and excl == 1
    with pytest.raises(rc.EmptyInput):
        rc.ratio_stats([rec(3.0, flagged=True)])


def test_nested_rigs_monotone_kappa_at_zero():
    rig10 = _default_rig()
    sigma3s = []
    kappas = []
    for k in (2, 3, 5, 10):
        rig_k = rc.prefix_rig(rig10, k)
        R = np.linalg.qr(rc.mv_jacobian(rig_k, DEFAULT_Y))[1]
        sigma3s.append(np.linalg.svd(R)[1][2])
        kappas.append(rc.mv_kappa(rig_k, DEFAULT_Y, np.zeros(2 * k)).kappa)
    assert all(b >= a - 1e-13 for a, b in zip(sigma3s, sigma3s[1:]))
    assert all(b <= a + 1e-13 for a, b in zip(kappas, kappas[1:]))


def test_csv_schema_and_determinism():
    rig = _default_rig()
    eta = rc.random_unit_normal(rig, DEFAULT_Y, 0)
    grid = rc.log_grid(-2, 0, 5)
    text1 = rc.records_to_csv(rc.experiment_sweep(rig, DEFAULT_Y, eta, grid))
    text2 = rc.records_to_csv(rc.experiment_sweep(rig, DEFAULT_Y, eta, grid))
    assert text1 == text2
    lines = text1.strip().split("\n")
    assert lines[0] == "t_rel,kappa,kappa_lo,kappa_hi,sigma3,ill_posed,kappa_est,ratio,flagged"
    assert len(lines) == 1 + 10
    first = lines[1].split(",")
    assert first[5] == "false" and first[8] == "false"
    assert first[6] == "" and first[7] == ""  # sweep rows carry no estimate
    # numbers round-trip exactly
    assert float(first[0]) == -1.0


def test_validate_records_per_row_errors(monkeypatch):
    import riemcond.experiments as exp

    rig = _default_rig()
    eta = rc.random_unit_normal(rig, DEFAULT_Y, 0)
    grid = rc.log_grid(-2, 0, 4, two_sided=False)
    real_triangulate = exp.triangulate
    boom = {"count": 0}

    def flaky(rig_, a, **kwargs):
        boom["count"] += 1
        if boom["count"] == 2:
            raise rc.DomainEscape("synthetic failure")
        return real_triangulate(rig_, a, **kwargs)

    monkeypatch.setattr(exp, "triangulate", flaky)
    records = rc.experiment_validate(rig, DEFAULT_Y, eta, grid)
    assert len(records) == 4  # the run continued past the failure
    failed = [r for r in records if r.error is not None]
    assert len(failed) == 1
    assert failed[0].flagged and "DomainEscape" in failed[0].error
    arith, geo, excluded = rc.ratio_stats(records)
    assert excluded == 1


def test_thread_pool_matches_serial(monkeypatch):
    rig = _default_rig()
    eta = rc.random_unit_normal(rig, DEFAULT_Y, 0)
    grid = rc.log_grid(-2, 1, 8)
    serial = rc.records_to_csv(rc.experiment_sweep(rig, DEFAULT_Y, eta, grid, workers=1))
    monkeypatch.setenv("RIEMCOND_THREADS", "4")
    threaded = rc.records_to_csv(rc.experiment_sweep(rig, DEFAULT_Y, eta, grid))
    assert serial == threaded
