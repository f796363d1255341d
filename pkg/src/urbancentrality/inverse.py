"""Inverse (reciprocal) eigenvector problems ``lam / x = M x``.

For symmetric, nonnegative, fully indecomposable ``M`` the positive
solution exists and is unique for every ``lam > 0``. It is the symmetric
matrix-balancing problem ``diag(x) M diag(x)`` having all row sums equal
to ``lam``, solved with a damped Sinkhorn-Knopp style fixed point.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import maximum_bipartite_matching

from . import kernels
from .errors import ConvergenceError, StructuralError
from .netgraph import as_array, is_irreducible

__all__ = [
    "InverseProblem",
    "ScalingCheck",
    "is_fully_indecomposable",
    "solve_inverse",
    "scaling_law_check",
]

EXHAUSTIVE_MAX_N = 12


def _fully_indecomposable_exhaustive(m: np.ndarray) -> bool:
    # partly decomposable <=> some proper nonempty row set R has its
    # nonzero columns inside a set of size <= |R|
    n = m.shape[0]
    masks = [sum(1 << j for j in np.flatnonzero(row)) for row in (m != 0)]
    union = [0] * (1 << n)
    size = [0] * (1 << n)
    for R in range(1, (1 << n) - 1):
        low = R & -R
        i = low.bit_length() - 1
        union[R] = union[R ^ low] | masks[i]
        size[R] = size[R ^ low] + 1
        if bin(union[R]).count("1") <= size[R]:
            return False
    return True


def _fully_indecomposable_matching(m: np.ndarray) -> bool:
    match = maximum_bipartite_matching(csr_matrix(m != 0), perm_type="column")
    if np.any(match < 0):
        return False
    # positive diagonal after the column permutation; then full
    # indecomposability is equivalent to irreducibility
    return is_irreducible(m[:, match])


def is_fully_indecomposable(M) -> bool:
    """True iff ``M`` has no p x q zero submatrix with ``p + q = n``."""
    m = as_array(M)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError("expected a square matrix")
    n = m.shape[0]
    if n == 1:
        return bool(m[0, 0] > 0)
    if n <= EXHAUSTIVE_MAX_N:
        return _fully_indecomposable_exhaustive(m)
    return _fully_indecomposable_matching(m)


@dataclass(frozen=True)
class InverseProblem:
    M: np.ndarray
    lam: float = 1.0

    def __post_init__(self):
        m = np.array(as_array(self.M), dtype=np.float64)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise StructuralError(f"expected a square matrix, got shape {m.shape}")
        if np.any(m < 0):
            raise StructuralError("matrix has negative entries")
        if not np.allclose(m, m.T, rtol=0, atol=1e-14 * max(1.0, np.abs(m).max())):
            raise StructuralError("matrix is not symmetric")
        if not is_fully_indecomposable(m):
            raise StructuralError(
                "matrix is not fully indecomposable (it has a p x q zero block with p + q = n)"
            )
        if not self.lam > 0:
            raise ValueError(f"lambda must be positive, got {self.lam}")
        m.setflags(write=False)
        object.__setattr__(self, "M", m)

    @property
    def n(self) -> int:
        return self.M.shape[0]


def solve_inverse(prob: InverseProblem, tol: float = 1e-12, max_iter: int = 100_000,
                  x0=None, f=None, backend: str | None = None) -> np.ndarray:
    """Positive ``x`` with ``lam / x_i = (M x)_i`` for every ``i``.

    Iterates ``x <- sqrt(x * lam / (M x))`` from ``x = 1/n``; the square
    root damps the 2-cycles of the undamped map ``x <- lam / (M x)``.

    Raises
    ------
    ConvergenceError
        With the residual history, if ``tol`` is not reached.
    NotImplementedError
        If a nonzero shift ``f`` is passed.
    """
    if f is not None and np.any(np.asarray(f) != 0):
        raise NotImplementedError(
            "inverse problems with a shift reduce to unshifted ones whose matrix is not fully "
            "indecomposable, so existence and uniqueness are not guaranteed; only f = 0 is supported"
        )
    n = prob.n
    start = np.full(n, 1.0 / n) if x0 is None else np.asarray(x0, dtype=np.float64)
    if start.shape != (n,) or np.any(start <= 0):
        raise ValueError("initial vector must be strictly positive with length n")
    x, it, res, history = kernels.balance_iteration(prob.M, prob.lam, start, tol, max_iter, backend)
    if not res <= tol:
        raise ConvergenceError(f"balancing iteration did not converge in {max_iter} iterations", res, history)
    return x


@dataclass(frozen=True)
class ScalingCheck:
    lam: float
    max_error: float
    ratio: np.ndarray
    passed: bool


def scaling_law_check(prob: InverseProblem, lam2: float, tol: float = 1e-9) -> ScalingCheck:
    """Check ``solve(lam2) == sqrt(lam2) * solve(lam)`` rescaled to ``lam = 1``.

    If ``x`` solves ``1/x = M x`` then ``c x`` solves ``lam/(c x) = M (c x)``
    exactly when ``c = sqrt(lam)``.
    """
    base = solve_inverse(InverseProblem(prob.M, 1.0))
    other = solve_inverse(InverseProblem(prob.M, lam2))
    err = float(np.max(np.abs(other - np.sqrt(lam2) * base)))
    return ScalingCheck(float(lam2), err, other / base, err <= tol)
