"""Condition numbers of critical-point, approximation, and generalized problems.

The critical-point condition number is ||H^{-1}|| with H = I - S the
distance Hessian; equivalently max_i 1 / |1 - c_i ||eta|||. The
generalized problem multiplies in the derivative A of the idealized
problem and measures the result in an SPD output metric G via its
Cholesky factor.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.linalg

from .curvature import WeingartenData
from .errors import ZeroOutput
from .linalg import metric_cholesky

# Relative threshold below which a singular value counts as zero (ill-posed).
SING_TOL = 1e-12


@dataclass
class ConditionReport:
    """Result of a condition-number computation.

    worst_input_direction is a unit vector in orthonormal tangent
    coordinates, present only when kappa is finite. bounds_lo/bounds_hi
    are the curvature sandwich bounds when curvature data was available.
    components records the sigma-values each factor contributed.
    """

    kappa: float
    ill_posed: bool
    worst_input_direction: Optional[np.ndarray] = None
    bounds_lo: Optional[float] = None
    bounds_hi: Optional[float] = None
    components: dict = field(default_factory=dict)


@dataclass(frozen=True)
class ProblemDerivative:
    """Derivative of the idealized problem in fixed coordinates.

    A is p x m: the derivative of the solution map in the orthonormal
    tangent frame of the input manifold and caller-chosen output
    coordinates. output_metric is the SPD Gram matrix of those output
    coordinates (identity when None).
    """

    A: np.ndarray
    output_metric: Optional[np.ndarray] = None

    def __post_init__(self):
        object.__setattr__(self, "A", np.asarray(self.A, dtype=float))
        if self.output_metric is not None:
            G = np.asarray(self.output_metric, dtype=float)
            metric_cholesky(G)  # raises NotSPD on failure
            object.__setattr__(self, "output_metric", G)


def spectral_norm_metric(M, G=None):
    """Largest singular value of M measured in the output metric G.

    Returns (sigma, v) where sigma = sigma_1(C M) for the Cholesky factor
    C^T C = G and v is the corresponding right singular vector (the worst
    input direction). G = None means the identity metric.
    """
    M = np.atleast_2d(np.asarray(M, dtype=float))
    if G is not None:
        M = metric_cholesky(G) @ M
    U, s, Vt = scipy.linalg.svd(M, full_matrices=False)
    return float(s[0]), Vt[0]


def kappa_cpp(H, sing_tol: float = SING_TOL) -> ConditionReport:
    """Condition number ||H^{-1}|| of a critical point with distance Hessian H.

    H must be symmetric. Returns infinity (ill_posed) when the smallest
    singular value of H falls below sing_tol relative to the largest.
    """
    H = np.atleast_2d(np.asarray(H, dtype=float))
    evals, evecs = scipy.linalg.eigh(H)
    sigma = np.abs(evals)
    k = int(np.argmin(sigma))
    sigma_min, sigma_max = float(sigma[k]), float(sigma.max())
    components = {"sigma_min_H": sigma_min, "sigma_max_H": sigma_max}
    # H = I - S carries the identity's scale, so the zero threshold is
    # relative to max(1, sigma_max); this also catches H entirely ~ 0
    # (every direction simultaneously focal).
    if sigma_min <= sing_tol * max(1.0, sigma_max):
        return ConditionReport(kappa=np.inf, ill_posed=True, components=components)
    return ConditionReport(
        kappa=1.0 / sigma_min,
        ill_posed=False,
        worst_input_direction=evecs[:, k],
        components=components,
    )


def kappa_cpp_curvatures(c, eta_norm: float, sing_tol: float = SING_TOL) -> float:
    """Curvature form of the critical-point condition number.

    max_i 1 / |1 - c_i ||eta|||; infinity when some factor vanishes.
    With no curvature data (eta = 0 convention) the value is 1.
    """
    c = np.asarray(c, dtype=float)
    if c.size == 0:
        return 1.0
    d = np.abs(1.0 - c * float(eta_norm))
    if d.min() <= sing_tol:
        return np.inf
    return float(1.0 / d.min())


def kappa_gcpp(pd: ProblemDerivative, H, sing_tol: float = SING_TOL) -> ConditionReport:
    """Condition number ||A H^{-1}||_G of a generalized critical point."""
    H = np.atleast_2d(np.asarray(H, dtype=float))
    evals = scipy.linalg.eigvalsh(H)
    sigma = np.abs(evals)
    sigma_min, sigma_max = float(sigma.min()), float(sigma.max())
    components = {"sigma_min_H": sigma_min, "sigma_max_H": sigma_max}
    if sigma_min <= sing_tol * max(1.0, sigma_max):
        return ConditionReport(kappa=np.inf, ill_posed=True, components=components)
    M = scipy.linalg.solve(H, pd.A.T, assume_a="sym").T  # A H^{-1}
    sigma1, v = spectral_norm_metric(M, pd.output_metric)
    components["sigma1_AHinv"] = sigma1
    return ConditionReport(
        kappa=sigma1, ill_posed=False, worst_input_direction=v, components=components
    )


def kappa_bounds(kappa_S: float, c, eta_norm: float, sing_tol: float = SING_TOL):
    """Curvature sandwich around the generalized condition number.

    (kappa_S / max_i |1 - c_i ||eta|||, kappa_S / min_i |1 - c_i ||eta|||);
    both collapse to kappa_S on the manifold (eta = 0).
    """
    c = np.asarray(c, dtype=float)
    if c.size == 0:
        return float(kappa_S), float(kappa_S)
    d = np.abs(1.0 - c * float(eta_norm))
    lo = float(kappa_S) / float(d.max()) if d.max() > sing_tol else np.inf
    hi = float(kappa_S) / float(d.min()) if d.min() > sing_tol else np.inf
    return lo, hi


def kappa_relative(kappa_abs: float, x_norm: float, y_norm: float) -> float:
    """Relative condition number kappa * ||x|| / ||y||."""
    if y_norm <= 0.0:
        raise ZeroOutput(f"output norm must be positive, got {y_norm}")
    return float(kappa_abs) * float(x_norm) / float(y_norm)


def ill_posedness_certificate(c, eta_norm: float = 0.0, merge_tol: float = 1e-9):
    """Signed offsets t along the unit normal ray where the problem is ill-posed.

    These are {1/c_i : c_i != 0}, the normal multiples whose length equals
    a critical radius; independent of the current offset eta_norm, which
    is accepted for signature uniformity with the other kappa operations.
    Offsets equal up to merge_tol (relative) are reported once, sorted.
    """
    c = np.asarray(c, dtype=float)
    nz = c[c != 0.0]
    if nz.size == 0:
        return np.empty(0)
    offsets = np.sort(1.0 / nz)
    clusters = [[offsets[0]]]
    for t in offsets[1:]:
        if abs(t - clusters[-1][-1]) <= merge_tol * max(abs(t), abs(clusters[-1][-1])):
            clusters[-1].append(t)
        else:
            clusters.append([t])
    return np.array([np.mean(cl) for cl in clusters])


def kappa_cpp_from_weingarten(wd: WeingartenData, sing_tol: float = SING_TOL) -> ConditionReport:
    """Critical-point condition number with the dual sigma/curvature route.

    Computes kappa from H = I - S and, when curvature data is present,
    from the curvature product form; a relative discrepancy above 1e-8
    raises a diagnostic warning (not an error). Bounds collapse to kappa
    itself since A = I for the plain critical-point problem.
    """
    report = kappa_cpp(wd.H, sing_tol=sing_tol)
    kappa_curv = kappa_cpp_curvatures(wd.curvatures, wd.eta_norm, sing_tol=sing_tol)
    report.components["kappa_curvatures"] = kappa_curv
    both_finite = np.isfinite(report.kappa) and np.isfinite(kappa_curv)
    if both_finite:
        disc = abs(report.kappa - kappa_curv) / max(report.kappa, kappa_curv)
        if disc > 1e-8:
            warnings.warn(
                f"sigma-based and curvature-based kappa disagree by {disc:.3e}",
                stacklevel=2,
            )
        report.bounds_lo, report.bounds_hi = kappa_bounds(
            1.0, wd.curvatures, wd.eta_norm, sing_tol=sing_tol
        )
    elif report.ill_posed != (not np.isfinite(kappa_curv)):
        warnings.warn("sigma-based and curvature-based ill-posedness verdicts differ", stacklevel=2)
    return report
