"""Pinhole multiview geometry: projection, DLT triangulation, curvature.

A rig of r cameras defines the stacked projection
mu(y) = [(A_l y + b_l) / (c_l . y + d_l)]_l from world points to R^{2r}.
Off the excluded set (principal planes, first-two-camera baseline) the
image is a 3-dimensional manifold; its Weingarten map and the condition
number 1 / sigma_3((I - S) R) have closed forms implemented here.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Tuple

import numpy as np
import scipy.linalg

from .condition import SING_TOL, ConditionReport, kappa_bounds
from .curvature import NORMALITY_TOL, weingarten
from .errors import (
    AtInfinity,
    DegenerateKernel,
    InvalidGeometry,
    NotNormal,
    OutsideDomain,
)
from .linalg import compact_qr
from .manifold import Parametrization

# Absolute floor on |c_l . y + d_l| and on the distance to the baseline.
DOM_TOL = 1e-8

_HOMOG_TOL = 1e-12  # |h_4| below this means a point/center at infinity


@dataclass(frozen=True)
class Camera:
    """Finite projective camera split into the blocks of P = [A b; c^T d]."""

    A: np.ndarray  # 2 x 3
    b: np.ndarray  # (2,)
    c: np.ndarray  # (3,)
    d: float

    def __post_init__(self):
        object.__setattr__(self, "A", np.asarray(self.A, dtype=float).reshape(2, 3))
        object.__setattr__(self, "b", np.asarray(self.b, dtype=float).reshape(2))
        object.__setattr__(self, "c", np.asarray(self.c, dtype=float).reshape(3))
        object.__setattr__(self, "d", float(self.d))
        s = scipy.linalg.svdvals(self.matrix)
        if s[0] == 0.0 or s[2] <= 1e-10 * s[0]:
            raise InvalidGeometry("camera matrix must have rank 3")

    @property
    def matrix(self):
        """The 3 x 4 projection matrix."""
        P = np.empty((3, 4))
        P[:2, :3] = self.A
        P[:2, 3] = self.b
        P[2, :3] = self.c
        P[2, 3] = self.d
        return P

    @classmethod
    def from_matrix(cls, P) -> "Camera":
        P = np.asarray(P, dtype=float).reshape(3, 4)
        return cls(A=P[:2, :3], b=P[:2, 3], c=P[2, :3], d=P[2, 3])

    def center_homogeneous(self):
        """Unit homogeneous kernel vector of P (the camera center)."""
        _, _, Vt = scipy.linalg.svd(self.matrix)
        return Vt[-1]

    def center(self):
        """Affine camera center; raises AtInfinity for affine cameras."""
        h = self.center_homogeneous()
        if abs(h[3]) < _HOMOG_TOL:
            raise AtInfinity("camera center is at infinity")
        return h[:3] / h[3]


@dataclass(frozen=True)
class CameraRig:
    """Ordered collection of r >= 2 cameras with a well-defined baseline."""

    cameras: Tuple[Camera, ...]

    def __post_init__(self):
        object.__setattr__(self, "cameras", tuple(self.cameras))
        if len(self.cameras) < 2:
            raise InvalidGeometry(f"a rig needs at least 2 cameras, got {len(self.cameras)}")
        h0 = self.cameras[0].center_homogeneous()
        h1 = self.cameras[1].center_homogeneous()
        if 1.0 - abs(float(h0 @ h1)) <= 1e-10:
            raise InvalidGeometry("first two camera centers coincide; baseline undefined")

    @property
    def r(self) -> int:
        return len(self.cameras)


def rig_to_dict(rig: CameraRig) -> dict:
    """JSON-ready form: {"cameras": [[12 numbers, row-major 3x4], ...]}."""
    return {"cameras": [cam.matrix.reshape(-1).tolist() for cam in rig.cameras]}


def rig_from_dict(data: dict) -> CameraRig:
    """Parse the rig wire format; structural problems raise ValueError,
    geometric ones (rank-deficient cameras, coincident centers) raise
    InvalidGeometry."""
    if "cameras" not in data:
        raise ValueError('rig object must have a "cameras" field')
    cams = []
    for i, row in enumerate(data["cameras"]):
        flat = np.asarray(row, dtype=float)
        if flat.shape != (12,):
            raise ValueError(f"cameras[{i}] must hold 12 numbers, got shape {flat.shape}")
        cams.append(Camera.from_matrix(flat.reshape(3, 4)))
    return CameraRig(cameras=tuple(cams))


def alphas(rig: CameraRig, y):
    """Projective depths c_l . y + d_l for every camera."""
    y = np.asarray(y, dtype=float)
    return np.array([cam.c @ y + cam.d for cam in rig.cameras])


def _baseline_distance(rig: CameraRig, y):
    """Distance from y to the line joining the first two camera centers.

    With a center at infinity the baseline is the line through the finite
    center along the infinite direction; with both at infinity there is
    no affine baseline to avoid and the distance is reported as infinite.
    """
    y = np.asarray(y, dtype=float)
    h0 = rig.cameras[0].center_homogeneous()
    h1 = rig.cameras[1].center_homogeneous()
    finite0, finite1 = abs(h0[3]) >= _HOMOG_TOL, abs(h1[3]) >= _HOMOG_TOL
    if finite0 and finite1:
        p0, p1 = h0[:3] / h0[3], h1[:3] / h1[3]
        v = p1 - p0
    elif finite0 or finite1:
        p0 = (h0[:3] / h0[3]) if finite0 else (h1[:3] / h1[3])
        v = h1[:3] if finite0 else h0[:3]
    else:
        return np.inf
    v = v / np.linalg.norm(v)
    w = y - p0
    return float(np.linalg.norm(w - (w @ v) * v))


def mv_domain_check(rig: CameraRig, y, dom_tol: float = DOM_TOL) -> bool:
    """True when y has safe depths in every camera and is off the baseline."""
    y = np.asarray(y, dtype=float)
    if np.abs(alphas(rig, y)).min() <= dom_tol:
        return False
    return _baseline_distance(rig, y) > dom_tol


def _require_domain(rig, y, dom_tol=DOM_TOL):
    if not mv_domain_check(rig, y, dom_tol):
        raise OutsideDomain(
            f"world point {np.asarray(y, dtype=float)} lies on a principal plane "
            "or the baseline (or within tolerance of them)"
        )


def mv_project(rig: CameraRig, y):
    """Stacked pinhole projection of y: a 2r-vector of image coordinates."""
    y = np.asarray(y, dtype=float)
    _require_domain(rig, y)
    a = alphas(rig, y)
    blocks = [(cam.A @ y + cam.b) / a[i] for i, cam in enumerate(rig.cameras)]
    return np.concatenate(blocks)


def mv_jacobian(rig: CameraRig, y):
    """2r x 3 derivative of the stacked projection at y."""
    y = np.asarray(y, dtype=float)
    _require_domain(rig, y)
    a = alphas(rig, y)
    blocks = [
        cam.A / a[i] - np.outer(cam.A @ y + cam.b, cam.c) / a[i] ** 2
        for i, cam in enumerate(rig.cameras)
    ]
    return np.vstack(blocks)


def mv_frame(rig: CameraRig, y):
    """Pushed-forward coordinate frame: column i is the field E_i at mu(y).

    Assembled per-direction from A_l e_i / alpha_l - c_{l,i} (A_l y + b_l) / alpha_l^2,
    the displayed form of the pushforward of the world axes; equals the
    Jacobian columnwise and is kept as an independent arrangement for tests.
    """
    y = np.asarray(y, dtype=float)
    _require_domain(rig, y)
    a = alphas(rig, y)
    cols = []
    for i in range(3):
        e = np.zeros(3)
        e[i] = 1.0
        col = [
            cam.A @ e / a[l] - cam.c[i] * (cam.A @ y + cam.b) / a[l] ** 2
            for l, cam in enumerate(rig.cameras)
        ]
        cols.append(np.concatenate(col))
    return np.column_stack(cols)


def triangulate_linear(rig: CameraRig, x, minimal: bool = False):
    """Direct linear triangulation of a (possibly inconsistent) correspondence.

    Stacks the rows (x_l e3 - e1) P_l and (y_l e3 - e2) P_l and returns the
    dehomogenized kernel direction. minimal=True uses only the first two
    cameras (the 4 x 4 system); the default uses all r cameras.
    """
    x = np.asarray(x, dtype=float)
    if x.shape != (2 * rig.r,):
        raise InvalidGeometry(f"correspondence must have length {2 * rig.r}, got {x.shape}")
    cams = rig.cameras[:2] if minimal else rig.cameras
    rows = []
    for l, cam in enumerate(cams):
        P = cam.matrix
        rows.append(x[2 * l] * P[2] - P[0])
        rows.append(x[2 * l + 1] * P[2] - P[1])
    M = np.vstack(rows)
    _, s, Vt = scipy.linalg.svd(M)
    # gap measured against the matrix scale: a kernel direction is ambiguous
    # both when sigma_3 ~ sigma_4 and when both vanish together
    if s[2] - s[3] <= 1e-8 * s[0]:
        raise DegenerateKernel(
            f"two smallest singular values nearly equal ({s[3]:.3e} vs {s[2]:.3e})"
        )
    h = Vt[-1]
    if abs(h[3]) < _HOMOG_TOL:
        raise AtInfinity("triangulated point is at infinity")
    return h[:3] / h[3]


def mv_weingarten_hat(rig: CameraRig, y, eta, normality_tol: float = NORMALITY_TOL):
    """Second fundamental form of the multiview manifold contracted with eta.

    Closed form: sum over cameras of
    2 (eta_l . (A_l y + b_l)) c_l c_l^T / alpha_l^3
    - (c_l (A_l^T eta_l)^T + (A_l^T eta_l) c_l^T) / alpha_l^2.
    """
    y = np.asarray(y, dtype=float)
    eta = np.asarray(eta, dtype=float)
    J = mv_jacobian(rig, y)
    if eta.shape != (2 * rig.r,):
        raise NotNormal(f"eta must have length {2 * rig.r}, got {eta.shape}")
    nrm = np.linalg.norm(eta)
    if nrm > 0:
        Q, _ = compact_qr(J)
        tangential = np.linalg.norm(Q.T @ eta)
        if tangential > normality_tol * nrm:
            raise NotNormal(
                f"eta has tangential component {tangential:.3e} (norm {nrm:.3e})"
            )
    a = alphas(rig, y)
    S_hat = np.zeros((3, 3))
    for l, cam in enumerate(rig.cameras):
        eta_l = eta[2 * l : 2 * l + 2]
        beta = eta_l @ (cam.A @ y + cam.b)
        g = cam.A.T @ eta_l
        S_hat += 2.0 * beta / a[l] ** 3 * np.outer(cam.c, cam.c)
        S_hat -= (np.outer(cam.c, g) + np.outer(g, cam.c)) / a[l] ** 2
    return S_hat


def mv_weingarten(rig: CameraRig, y, eta):
    """Frame and Weingarten map at mu(y): returns (Q, R, S_hat, S)."""
    J = mv_jacobian(rig, y)
    Q, R = compact_qr(J)
    S_hat = mv_weingarten_hat(rig, y, eta)
    return Q, R, S_hat, weingarten(S_hat, R)


def kappa_from_factors(R, S, sing_tol: float = SING_TOL):
    """kappa = 1 / sigma_3((I - S) R) plus the worst tangent direction.

    Returns (kappa, ill_posed, u, singular_values) where u is the third
    left singular vector of (I - S) R: the tangent coordinates of the
    worst ambient perturbation. The zero threshold is taken relative to
    the larger of sigma_1((I - S) R) and sigma_1(R) so that I - S ~ 0
    (all directions focal at once) is detected as ill-posed too.
    """
    M = (np.eye(3) - S) @ R
    U, s, _ = scipy.linalg.svd(M)
    scale = max(float(s[0]), float(scipy.linalg.svdvals(R)[0]))
    ill = scale == 0.0 or s[2] <= sing_tol * scale
    kappa = np.inf if ill else 1.0 / float(s[2])
    return kappa, bool(ill), U[:, 2], s


def mv_kappa(rig: CameraRig, y, eta, sing_tol: float = SING_TOL) -> ConditionReport:
    """Condition number of triangulation at the critical pair (mu(y) + eta, mu(y)).

    The worst_input_direction is in the orthonormal tangent coordinates of
    the frame Q at mu(y); the worst ambient perturbation is Q times it.
    """
    eta = np.asarray(eta, dtype=float)
    _, R, _, S = mv_weingarten(rig, y, eta)
    kappa, ill, u, s = kappa_from_factors(R, S, sing_tol)
    sR = scipy.linalg.svdvals(R)
    kappa_S = np.inf if sR[2] <= sing_tol * sR[0] else 1.0 / float(sR[2])
    eta_norm = float(np.linalg.norm(eta))
    if eta_norm > 0:
        curv = np.sort(scipy.linalg.eigvalsh(S)) / eta_norm
    else:
        curv = np.empty(0)
    lo, hi = kappa_bounds(kappa_S, curv, eta_norm, sing_tol)
    components = {
        "sigma3": float(s[2]),
        "sigma1": float(s[0]),
        "sigma3_R": float(sR[2]),
        "kappa_S": float(kappa_S),
    }
    return ConditionReport(
        kappa=kappa,
        ill_posed=ill,
        worst_input_direction=None if ill else u,
        bounds_lo=lo,
        bounds_hi=hi,
        components=components,
    )


def as_parametrization(rig: CameraRig) -> Parametrization:
    """The multiview manifold as a chart over world space.

    Carries the analytic Jacobian but no analytic second derivatives, so
    curvature computed through this adapter exercises the finite-difference
    route (the independent check of the closed-form Weingarten map).
    """
    return Parametrization(
        ambient_dim=2 * rig.r,
        intrinsic_dim=3,
        point=lambda y: mv_project(rig, y),
        jac=lambda y: mv_jacobian(rig, y),
        hess_dirs=None,
        domain_check=lambda y: mv_domain_check(rig, y),
        name=f"multiview(r={rig.r})",
    )
