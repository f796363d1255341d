"""Shifted eigenproblems ``x = M x + f`` and occupancy calibration.

For irreducible nonnegative ``M`` the problem has a unique positive
solution exactly when ``rho(M) < 1`` and ``f != 0``. Spectral radii within
``RHO_BAND`` of 1 are treated as equal to 1.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np
from scipy.linalg import lu_factor, lu_solve

from .errors import InfeasibleModelError, ReducibleMatrixError
from .netgraph import RelationshipMatrix, as_array, is_irreducible
from .spectral import spectral_radius

__all__ = [
    "RHO_BAND",
    "Verdict",
    "Classification",
    "ShiftedSystem",
    "ShiftedModel",
    "classify",
    "solve_shifted",
    "calibrate_mu",
]

RHO_BAND = 1e-9
MU_MARGIN = 1e-9


class Verdict(enum.Enum):
    UNIQUE_POSITIVE = "unique positive solution (rho < 1, f != 0)"
    EIGENVECTOR_CASE = "eigenvector model (rho = 1, f = 0)"
    INFEASIBLE = "no nonnegative solution (rho = 1, f != 0)"
    SUPERCRITICAL = "no nonnegative nontrivial solution (rho > 1)"
    TRIVIAL = "only the zero solution (rho < 1, f = 0)"


@dataclass(frozen=True)
class Classification:
    verdict: Verdict
    rho: float

    def __str__(self):
        return f"{self.verdict.name} (rho = {self.rho:.12g}): {self.verdict.value}"


def _check_f(f, n):
    f = np.asarray(f, dtype=np.float64)
    if f.shape != (n,):
        raise ValueError(f"shift vector has shape {f.shape}, expected ({n},)")
    if np.any(f < 0):
        raise ValueError(f"shift vector must be nonnegative; negative at indices {np.flatnonzero(f < 0).tolist()}")
    return f


def classify(M, f) -> Classification:
    """Place ``(M, f)`` in the solvability trichotomy for ``(I - M) x = f``."""
    m = as_array(M)
    f = _check_f(f, m.shape[0])
    rho = spectral_radius(m)
    zero = not np.any(f > 0)
    if rho > 1 + RHO_BAND:
        v = Verdict.SUPERCRITICAL
    elif rho >= 1 - RHO_BAND:
        v = Verdict.EIGENVECTOR_CASE if zero else Verdict.INFEASIBLE
    else:
        v = Verdict.TRIVIAL if zero else Verdict.UNIQUE_POSITIVE
    return Classification(v, rho)


class ShiftedSystem:
    """LU factorization of ``I - M`` reusable across right-hand sides.

    Read-only after construction, so one instance can be shared.
    """

    def __init__(self, M, check: bool = True):
        m = as_array(M)
        if check:
            if not is_irreducible(m):
                raise ReducibleMatrixError("shifted model needs an irreducible matrix")
            self.rho = spectral_radius(m)
            if self.rho >= 1 - RHO_BAND:
                verdict = Verdict.SUPERCRITICAL if self.rho > 1 + RHO_BAND else Verdict.INFEASIBLE
                raise InfeasibleModelError(
                    f"rho(M) = {self.rho:.12g} is not below 1: (I - M) x = f has no nonnegative "
                    "nontrivial solution unless rho(M) < 1 (rho = 1 admits only f = 0)",
                    verdict, self.rho,
                )
        else:
            self.rho = None
        self.M = m
        self._lu = lu_factor(np.eye(m.shape[0]) - m)

    def solve(self, f) -> np.ndarray:
        return lu_solve(self._lu, np.asarray(f, dtype=np.float64))


def solve_shifted(M, f) -> np.ndarray:
    """Unique positive solution of ``x = M x + f``.

    Raises
    ------
    InfeasibleModelError
        If ``f`` is zero (use the eigenvector model) or ``rho(M) >= 1``.
    """
    m = as_array(M)
    f = _check_f(f, m.shape[0])
    if not np.any(f > 0):
        raise InfeasibleModelError(
            "f = 0: the shifted model degenerates; use the eigenvector model (spectral.eigen_centrality)",
            Verdict.EIGENVECTOR_CASE, None,
        )
    return ShiftedSystem(m).solve(f)


def _total(K, mu, f):
    n = K.shape[0]
    lu = lu_factor(np.eye(n) - mu * K)
    x = lu_solve(lu, f)
    return x, lu


def calibrate_mu(B, w, f, N: float, tol: float = 1e-10, max_iter: int = 200):
    """Find ``mu`` so that ``x = mu B diag(w) x + f`` has ``sum(x) == N``.

    The total occupancy ``t(mu)`` increases strictly from ``sum(f)`` at
    ``mu = 0`` to infinity as ``mu -> 1/rho``; the root is bracketed on
    ``[0, (1 - 1e-9)/rho]`` and found by Newton steps safeguarded with
    bisection.

    Returns
    -------
    mu : float
    x : ndarray
    """
    b = as_array(B)
    w = np.asarray(w, dtype=np.float64)
    if np.any(~(w > 0)):
        raise ValueError("weights must be positive")
    K = b * w[None, :]
    f = _check_f(f, K.shape[0])
    if not np.any(f > 0):
        raise InfeasibleModelError(
            "f = 0: no calibration needed; use the eigenvector model", Verdict.EIGENVECTOR_CASE
        )
    free = N - f.sum()
    if not free > 0:
        raise InfeasibleModelError(
            f"total N = {N:.12g} does not exceed the forced occupancy sum(f) = {f.sum():.12g}; "
            "no free-to-move population remains",
            Verdict.INFEASIBLE,
        )
    rho = spectral_radius(K)
    lo, hi = 0.0, (1 - MU_MARGIN) / rho
    x_hi, _ = _total(K, hi, f)
    if x_hi.sum() < N:
        raise InfeasibleModelError(
            f"N = {N:.12g} needs mu within {MU_MARGIN:g} of 1/rho; the model is numerically critical",
            Verdict.INFEASIBLE, rho,
        )

    mu = free / N / rho  # mean-field start inside the bracket
    best = None
    polish = 0
    for _ in range(max_iter):
        x, lu = _total(K, mu, f)
        g = x.sum() - N
        if best is None or abs(g) < abs(best[2]):
            best = (mu, x, g)
        if abs(g) <= tol * N:
            polish += 1
            if polish > 3 or g == 0:
                break
        if g > 0:
            hi = mu
        else:
            lo = mu
        # d t / d mu = 1 (I - mu K)^-1 K x
        dt = lu_solve(lu, K @ x).sum()
        step = mu - g / dt if dt > 0 else None
        if step is None or not lo < step < hi:
            step = 0.5 * (lo + hi)
        if step == mu:
            break
        mu = step
    mu, x, g = best
    if abs(g) > tol * N:
        raise InfeasibleModelError(f"calibration stalled with |sum(x) - N| = {abs(g):.3e}", rho=rho)
    return float(mu), x


@dataclass(frozen=True)
class ShiftedModel:
    """The tuple (B, w, f, N, mu) of ``x = mu B diag(w) x + f`` with ``sum(x) = N``.

    Build one with :meth:`calibrated` to have ``mu`` chosen from ``N``.
    """

    B: RelationshipMatrix
    w: np.ndarray
    f: np.ndarray
    N: float
    mu: float = 1.0

    def __post_init__(self):
        B = self.B if isinstance(self.B, RelationshipMatrix) else RelationshipMatrix(self.B)
        object.__setattr__(self, "B", B)
        w = np.array(self.w, dtype=np.float64)
        if w.shape != (B.n,) or np.any(~(w > 0)):
            raise ValueError("weights must be a positive vector of length n")
        f = _check_f(np.array(self.f, dtype=np.float64), B.n)
        if not np.any(f > 0):
            raise InfeasibleModelError(
                "f = 0 belongs to the eigenvector model, not the shifted one", Verdict.EIGENVECTOR_CASE
            )
        if not self.mu > 0 or not self.N > 0:
            raise ValueError("mu and N must be positive")
        for a in (w, f):
            a.setflags(write=False)
        object.__setattr__(self, "w", w)
        object.__setattr__(self, "f", f)
        rho = spectral_radius(self.M)
        if rho >= 1 - RHO_BAND:
            raise InfeasibleModelError(
                f"rho(mu B W) = {rho:.12g} must be below 1", classify(self.M, f).verdict, rho
            )

    @classmethod
    def calibrated(cls, B, w, f, N: float, tol: float = 1e-10) -> "ShiftedModel":
        mu, _ = calibrate_mu(B, w, f, N, tol)
        return cls(B, w, f, N, mu)

    @property
    def n(self) -> int:
        return self.B.n

    @property
    def M(self) -> np.ndarray:
        return self.mu * self.B.entries * self.w[None, :]

    def solve(self) -> np.ndarray:
        return ShiftedSystem(self.M, check=False).solve(self.f)
