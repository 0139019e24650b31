"""Small dense linear-algebra helpers shared across modules."""

from __future__ import annotations

import numpy as np
import scipy.linalg

from .errors import NotSPD, SingularR


def compact_qr(J):
    """Compact QR of a tall matrix with the diag(R) > 0 sign convention.

    The sign normalization makes the frame deterministic: two computations
    of the same Jacobian give bit-identical Q and R.
    """
    J = np.asarray(J, dtype=float)
    Q, R = scipy.linalg.qr(J, mode="economic")
    d = np.sign(np.diag(R))
    d[d == 0] = 1.0
    return Q * d, d[:, None] * R


def congruence_by_inverse(S_hat, R, cond_tol=1e-14):
    """Return R^{-T} S_hat R^{-1} for upper-triangular R, symmetrized.

    Raises SingularR when R is numerically singular (its diagonal carries
    the singular values of the triangular factor up to conditioning).
    """
    R = np.asarray(R, dtype=float)
    diag = np.abs(np.diag(R))
    if diag.min() == 0.0 or diag.min() <= cond_tol * diag.max():
        raise SingularR(f"triangular factor singular: |diag| range {diag.min():.3e}..{diag.max():.3e}")
    # R^{-T} S_hat = solve(R^T, S_hat), then (.) R^{-1} = solve(R^T, (.)^T)^T
    Y = scipy.linalg.solve_triangular(R, np.asarray(S_hat, dtype=float), trans="T", lower=False)
    S = scipy.linalg.solve_triangular(R, Y.T, trans="T", lower=False).T
    return 0.5 * (S + S.T)


def metric_cholesky(G, sym_tol=1e-10):
    """Upper-triangular factor C with G = C^T C; raises NotSPD otherwise."""
    G = np.asarray(G, dtype=float)
    if G.ndim != 2 or G.shape[0] != G.shape[1]:
        raise NotSPD(f"metric must be square, got shape {G.shape}")
    scale = max(1.0, np.abs(G).max())
    if np.abs(G - G.T).max() > sym_tol * scale:
        raise NotSPD("metric is not symmetric")
    try:
        L = np.linalg.cholesky(G)
    except np.linalg.LinAlgError as exc:
        raise NotSPD("metric is not positive definite") from exc
    return L.T
