"""Perron-Frobenius eigenpairs of nonnegative irreducible matrices.

The dominant eigenpair is found by power iteration on ``M / s + I`` where
``s`` is the largest row sum of ``M``. The unit shift makes the iteration
matrix primitive, so periodic patterns (bipartite networks such as a path)
no longer oscillate, and dividing by ``s`` keeps the shift proportionate
for matrices of any magnitude.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import ConvergenceError, ReducibleMatrixError
from .netgraph import RelationshipMatrix, UrbanNetwork, apply_weights, as_array, build_matrix, is_irreducible

__all__ = [
    "PerronPair",
    "perron_pair",
    "spectral_radius",
    "normalize_to_unit_radius",
    "eigen_centrality",
]

DEFAULT_TOL = 1e-12
DEFAULT_MAX_ITER = 100_000


@dataclass(frozen=True)
class PerronPair:
    """Perron-Frobenius eigenvalue with right (column) and left (row) vectors.

    ``right`` sums to 1 unless another total was requested. ``left`` is
    scaled so that ``left @ right == 1`` when ``biorthonormalized``.
    """

    lam: float
    right: np.ndarray
    left: np.ndarray | None
    biorthonormalized: bool
    residual: float
    left_residual: float | None = None
    iterations: int = 0


def _check_input(M) -> np.ndarray:
    m = as_array(M)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    if np.any(m < 0):
        raise ValueError("matrix has negative entries")
    if not is_irreducible(m):
        raise ReducibleMatrixError(
            "matrix is reducible (support graph not strongly connected); "
            "the Perron-Frobenius theorem does not apply"
        )
    return m


def _dominant(m, s, tol, max_iter, x0, backend, what):
    n = m.shape[0]
    start = np.full(n, 1.0 / n) if x0 is None else np.asarray(x0, dtype=np.float64)
    if start.shape != (n,) or np.any(start <= 0):
        raise ValueError("initial vector must be strictly positive with length n")
    lam, x, it, res = kernels.power_iteration(m / s, start, 1.0, tol / s, max_iter, backend)
    if res > tol / s:
        raise ConvergenceError(
            f"power iteration for the {what} Perron vector did not converge in {max_iter} iterations",
            res * s,
        )
    return lam * s, np.asarray(x), it


def _polish_left(m, lam, u, x):
    # one least-squares correction on [(M - lam I)^T; x^T] u = [0; 1]
    n = m.shape[0]
    A = np.vstack([m.T - lam * np.eye(n), x[None, :]])
    r = np.concatenate([np.zeros(n), [1.0]]) - A @ u
    du = np.linalg.lstsq(A, r, rcond=None)[0]
    v = u + du
    if np.max(np.abs(v @ m - lam * v)) < np.max(np.abs(u @ m - lam * u)):
        u = v
    return u / (u @ x)


def perron_pair(M, tol: float = DEFAULT_TOL, max_iter: int = DEFAULT_MAX_ITER,
                x0=None, left: bool = True, total: float = 1.0,
                backend: str | None = None) -> PerronPair:
    """Perron-Frobenius eigenvalue and eigenvectors of ``M``.

    The right vector is scaled to sum to ``total``; the left vector is then
    scaled so that ``u @ x = 1``. Both residuals ``max|Mx - lam x|`` and
    ``max|uM - lam u|`` are at most ``tol``, the latter up to the rounding
    floor ``64 eps lam max|u|`` when ``u`` is large.

    Raises
    ------
    ReducibleMatrixError
        If the support graph of ``M`` is not strongly connected.
    ConvergenceError
        If the iteration does not reach ``tol`` within ``max_iter`` steps.
    """
    m = _check_input(M)
    s = float(m.sum(axis=1).max())
    lam, x, it = _dominant(m, s, tol / max(1.0, abs(total)), max_iter, x0, backend, "right")
    x = x * (total / x.sum())
    res = float(np.max(np.abs(m @ x - lam * x)))

    u = None
    lres = None
    if left:
        mt = np.ascontiguousarray(m.T)
        _, u, lit = _dominant(mt, s, tol, max_iter, x0, backend, "left")
        it += lit
        u = u / (u @ x)
        # the two-sided quotient is second-order accurate in the vector errors
        lam = float(u @ m @ x) / float(u @ x)
        res = float(np.max(np.abs(m @ x - lam * x)))
        u = _polish_left(m, lam, u, x)
        lres = float(np.max(np.abs(u @ m - lam * u)))
        # rounding alone leaves about eps * lam * max|u| in the residual
        floor = 64 * np.finfo(float).eps * abs(lam) * float(np.abs(u).max())
        if lres > max(tol, floor):
            raise ConvergenceError("left Perron vector could not reach tolerance", lres)
    return PerronPair(float(lam), x, u, left, res, lres, it)


def spectral_radius(M, tol: float = DEFAULT_TOL, max_iter: int = DEFAULT_MAX_ITER,
                    backend: str | None = None) -> float:
    """Spectral radius of a nonnegative irreducible matrix."""
    return perron_pair(M, tol, max_iter, left=False, backend=backend).lam


def normalize_to_unit_radius(B, w=None, tol: float = DEFAULT_TOL) -> RelationshipMatrix:
    """Return ``B diag(w) / lam`` so that the result has spectral radius 1."""
    M = as_array(B) if w is None else as_array(apply_weights(B, w))
    lam = spectral_radius(M, tol)
    prov = {"lambda": lam, "base": getattr(B, "kind", "user")}
    if w is not None:
        prov["w"] = np.asarray(w, dtype=float).copy()
    return RelationshipMatrix(M / lam, "scaled", prov)


def eigen_centrality(net: UrbanNetwork, kind: str = "adjacency", weights=None,
                     total: float = 1.0, metric: bool = False,
                     tol: float = DEFAULT_TOL) -> np.ndarray:
    """Eigenvector of centralities of ``B diag(weights)`` scaled to sum ``total``.

    Only ratios between entries carry meaning; ``total`` is presentation.
    """
    if not total > 0:
        raise ValueError(f"total must be positive, got {total}")
    B = build_matrix(net, kind, metric)
    M = B if weights is None else apply_weights(B, weights)
    return perron_pair(M, tol, left=False, total=total).right
