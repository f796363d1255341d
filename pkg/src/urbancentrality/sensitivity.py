"""Derivatives and elasticities of occupancy with respect to model parameters.

Two families are covered, both with total occupancy held fixed so every
derivative vector sums to zero:

* eigenvector models ``x = (1/lam) B W x`` (B symmetric), differentiated
  with respect to a weight ``w_i``;
* shifted models ``x = mu B W x + f``, differentiated with respect to a
  weight ``w_i`` or a forced-occupancy entry ``f_i``, with ``mu``
  recalibrated so that ``sum(x) = N``.

For several parameters the coefficient matrix is shared; it is factorized
once per base point.
"""
from __future__ import annotations

import re
import warnings
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np
from scipy.linalg import lu_factor, lu_solve, solve_triangular, svdvals

from .errors import SingularSystemError, StructuralError
from .netgraph import RelationshipMatrix, as_array
from .shifted import ShiftedModel, calibrate_mu
from .spectral import PerronPair, perron_pair

__all__ = [
    "Parameter",
    "EigenModel",
    "SensitivityReport",
    "parse_parameter",
    "lambda_prime",
    "derivative_unshifted",
    "derivative_shifted",
    "elasticity",
    "invertibility_margin",
    "full_report",
    "finite_difference_check",
]


@dataclass(frozen=True)
class Parameter:
    """A single model parameter: ``weight`` (w_i) or ``shift`` (f_i).

    ``index`` is 0-based; ``value`` is the base value, filled in from the
    model when left as ``None``.
    """

    kind: str
    index: int
    value: float | None = None

    def __post_init__(self):
        if self.kind not in ("weight", "shift"):
            raise ValueError(f"parameter kind must be 'weight' or 'shift', got {self.kind!r}")
        if self.index < 0:
            raise ValueError("parameter index must be nonnegative")
        if self.value is not None:
            if self.kind == "weight" and not self.value > 0:
                raise ValueError("weight parameters need a positive base value")
            if self.kind == "shift" and not self.value >= 0:
                raise ValueError("shift parameters need a nonnegative base value")

    @property
    def label(self) -> str:
        return f"{'w' if self.kind == 'weight' else 'f'}:{self.index + 1}"

    @classmethod
    def weight(cls, index: int) -> "Parameter":
        return cls("weight", index)

    @classmethod
    def shift(cls, index: int) -> "Parameter":
        return cls("shift", index)


_PARAM_RE = re.compile(r"^\s*([wf])\s*:\s*(.+?)\s*$")


def parse_parameter(text: str, ids: Sequence[str] | None = None) -> Parameter:
    """Parse ``w:INDEX`` / ``f:INDEX`` (1-based index or a node id)."""
    m = _PARAM_RE.match(text)
    if not m:
        raise ValueError(f"cannot parse parameter {text!r}; expected w:INDEX or f:INDEX")
    kind = "weight" if m.group(1) == "w" else "shift"
    ref = m.group(2)
    if ids is not None and ref in ids:
        return Parameter(kind, list(ids).index(ref))
    try:
        k = int(ref)
    except ValueError:
        raise ValueError(f"unknown node {ref!r} in parameter {text!r}") from None
    if k < 1 or (ids is not None and k > len(ids)):
        raise ValueError(f"parameter index {k} out of range")
    return Parameter(kind, k - 1)


@dataclass(frozen=True)
class EigenModel:
    """Unshifted weighted model ``x = (1/lam) B diag(w) x`` with ``sum(x) = N``."""

    B: RelationshipMatrix
    w: np.ndarray
    N: float = 1.0

    def __post_init__(self):
        B = self.B if isinstance(self.B, RelationshipMatrix) else RelationshipMatrix(self.B)
        object.__setattr__(self, "B", B)
        w = np.array(self.w, dtype=np.float64)
        if w.shape != (B.n,) or np.any(~(w > 0)):
            raise ValueError("weights must be a positive vector of length n")
        if not self.N > 0:
            raise ValueError("N must be positive")
        w.setflags(write=False)
        object.__setattr__(self, "w", w)

    @property
    def n(self) -> int:
        return self.B.n

    def solve(self) -> np.ndarray:
        return perron_pair(self.B.entries * self.w[None, :], left=False, total=self.N).right


@dataclass
class SensitivityReport:
    """Base solution, derivative and elasticity matrices (rows = nodes).

    ``rates`` holds lam' (eigenvector models) or mu' (shifted models) per
    parameter, as named by ``rate_kind``.
    """

    params: list
    base_x: np.ndarray
    derivatives: np.ndarray
    elasticities: np.ndarray
    rates: np.ndarray
    rate_kind: str
    N: float
    model_kind: str
    diagnostics: dict = field(default_factory=dict)

    @property
    def headers(self) -> list[str]:
        return [p.label for p in self.params]


def lambda_prime(B, w, i: int, pair: PerronPair) -> float:
    """Derivative of the Perron eigenvalue of ``B diag(w)`` w.r.t. ``w_i``.

    Equals ``x_i * (u B e_i)`` for the biorthonormalized pair ``(x, u)``.
    """
    if not pair.biorthonormalized or pair.left is None:
        raise ValueError("lambda_prime needs a biorthonormalized Perron pair (u x = 1)")
    x, u = pair.right, pair.left
    if abs(u @ x - 1) > 1e-9:
        raise ValueError(f"Perron pair is not biorthonormal: u x = {u @ x!r}")
    b = as_array(B)
    return float(x[i] * (u @ b[:, i]))


class _EigenSensitivity:
    """Shared factorization of ``[I - M; 1]`` at one base point."""

    def __init__(self, B, w, N):
        b = as_array(B)
        if not np.allclose(b, b.T, rtol=0, atol=1e-14 * max(1.0, np.abs(b).max())):
            raise StructuralError("weight sensitivity of eigenvector models needs a symmetric B")
        self.b = b
        self.w = np.asarray(w, dtype=np.float64)
        self.N = float(N)
        K = b * self.w[None, :]
        self.pair = perron_pair(K)
        self.lam = self.pair.lam
        self.M = K / self.lam
        self.x = self.pair.right * self.N
        n = b.shape[0]
        aug = np.vstack([np.eye(n) - self.M, np.ones((1, n))])
        self.Q, self.R = np.linalg.qr(aug)
        d = np.abs(np.diag(self.R))
        self.rank = int(np.sum(d > 1e-12 * d.max()))
        if self.rank < n:
            raise SingularSystemError(f"augmented system [I - M; 1] has rank {self.rank} < {n}")
        self._aug = aug
        self.max_consistency = 0.0

    def derivative(self, i):
        lp = lambda_prime(self.b, self.w, i, self.pair)
        # M' x = (1/lam) B E_ii x - (lam'/lam) M x
        mpx = self.b[:, i] * self.x[i] / self.lam - (lp / self.lam) * (self.M @ self.x)
        rhs = np.append(mpx, 0.0)
        xp = solve_triangular(self.R, self.Q.T @ rhs)
        self.max_consistency = max(self.max_consistency, float(np.max(np.abs(self._aug @ xp - rhs))))
        return xp, lp


def derivative_unshifted(B, w, i: int, N: float = 1.0) -> np.ndarray:
    """Derivative of the eigenvector model ``x`` (``sum(x) = N``) w.r.t. ``w_i``.

    Solves ``(I - M) x' = M' x`` together with ``sum(x') = 0``.
    """
    return _EigenSensitivity(B, w, N).derivative(i)[0]


class _ShiftedSensitivity:
    """Factorization of ``C`` for a calibrated shifted model.

    Works with the effective matrix ``K = mu0 B diag(w)``, which puts the
    relative scaling ``mu / mu0`` at 1 at the base point.
    """

    def __init__(self, model: ShiftedModel, total: float | None = None):
        self.model = model
        K = model.M
        self.K = K
        self.f = np.asarray(model.f)
        self.x = model.solve()
        base_total = float(self.x.sum())
        if abs(model.N - base_total) > 1e-8 * base_total:
            warnings.warn(
                f"model N = {model.N:.12g} differs from sum(x0) = {base_total:.12g}; using sum(x0)",
                stacklevel=3,
            )
        N = base_total
        if total is not None and abs(total - base_total) > 1e-8 * base_total:
            warnings.warn(f"overriding N = sum(x0) = {base_total:.12g} with {total:.12g}", stacklevel=3)
            N = float(total)
        self.N = N
        n = K.shape[0]
        one_K = K.sum(axis=0)
        self.one_K = one_K
        self.s = float(one_K @ self.x)
        self.free = N - self.f.sum()
        C = np.outer(self.x - self.f, one_K) + self.s * np.eye(n) - self.free * K
        sv = svdvals(C)
        self.sigma_min_ratio = float(sv[-1] / sv[0])
        if sv[-1] <= 1e-10 * sv[0]:
            raise SingularSystemError(
                f"coefficient matrix C is numerically singular (sigma_min/sigma_max = {self.sigma_min_ratio:.3e})"
            )
        self.C = C
        self._lu = lu_factor(C)

    def dx(self, p: Parameter) -> np.ndarray:
        K, x, f = self.K, self.x, self.f
        if p.kind == "shift":
            # W' = 0, f' = e_i
            Dx = -(K @ x)
            Dx[p.index] += self.s
        else:
            # W' = E_ii, so B W' x = mu0 B e_i x_i
            Kpx = self.model.mu * self.model.B.entries[:, p.index] * x[p.index]
            t = Kpx.sum()
            Dx = self.free * Kpx + f * t - t * x
        return Dx

    def derivative(self, p: Parameter):
        Dx = self.dx(p)
        xp = lu_solve(self._lu, Dx)
        # mu_rel = (N - 1f) / (1 K x), differentiated at the base point
        one_fp = 1.0 if p.kind == "shift" else 0.0
        if p.kind == "weight":
            one_kpx = self.model.mu * self.model.B.entries[:, p.index].sum() * self.x[p.index]
        else:
            one_kpx = 0.0
        dmu_rel = (-one_fp * self.s - self.free * (one_kpx + self.one_K @ xp)) / self.s ** 2
        return xp, self.model.mu * dmu_rel

    def margin(self) -> float:
        n = self.K.shape[0]
        v = self.K @ self.x
        # det C = s^n det(I - K) * margin, by the matrix determinant lemma
        return float(1.0 + self.one_K @ np.linalg.solve(np.eye(n) - self.K, v) / self.s)


def _check_param(p: Parameter, n: int, shifted: bool):
    if p.index >= n:
        raise ValueError(f"parameter {p.label} refers to node {p.index + 1} of {n}")
    if p.kind == "shift" and not shifted:
        raise ValueError(f"parameter {p.label}: eigenvector models have no forced occupancy")


def derivative_shifted(model: ShiftedModel, param: Parameter, total: float | None = None) -> np.ndarray:
    """Derivative of the calibrated shifted model's ``x`` w.r.t. one parameter.

    Solves ``C x' = D x``; ``sum(x)`` stays at ``N = sum(x0)`` unless
    ``total`` overrides it.

    Raises
    ------
    SingularSystemError
        If ``C`` is numerically singular at the base point.
    """
    _check_param(param, model.n, True)
    return _ShiftedSensitivity(model, total).derivative(param)[0]


def invertibility_margin(model: ShiftedModel) -> float:
    """The determinant factor ``1 + (1 M) (I - M)^-1 M x / (1 M x)``, always > 1."""
    return _ShiftedSensitivity(model).margin()


def elasticity(x, x_prime, t0: float) -> np.ndarray:
    """Entrywise ``x'_i * t0 / x_i``."""
    x = np.asarray(x, dtype=np.float64)
    xp = np.asarray(x_prime, dtype=np.float64)
    if np.any(x == 0):
        raise ValueError(f"elasticity undefined where x = 0 (indices {np.flatnonzero(x == 0).tolist()})")
    if t0 == 0:
        return np.zeros_like(x)
    return xp * t0 / x


def _base_value(model, p: Parameter) -> float:
    return float(model.w[p.index] if p.kind == "weight" else model.f[p.index])


def full_report(model, params: Sequence[Parameter | str] = (), total: float | None = None) -> SensitivityReport:
    """Derivatives and elasticities of ``model`` for each parameter, in order."""
    shifted = isinstance(model, ShiftedModel)
    ps = [parse_parameter(p) if isinstance(p, str) else p for p in params]
    for p in ps:
        _check_param(p, model.n, shifted)
    keys = [(p.kind, p.index) for p in ps]
    if len(set(keys)) != len(keys):
        raise ValueError("parameters must be distinct")
    ps = [replace(p, value=_base_value(model, p)) for p in ps]

    n = model.n
    if shifted:
        eng = _ShiftedSensitivity(model, total)
        x, N, rate_kind = eng.x, eng.N, "mu"
    else:
        eng = _EigenSensitivity(model.B, model.w, model.N if total is None else total)
        x, N, rate_kind = eng.x, eng.N, "lambda"
    D = np.zeros((n, len(ps)))
    E = np.zeros((n, len(ps)))
    rates = np.zeros(len(ps))
    for j, p in enumerate(ps):
        xp, r = eng.derivative(p) if shifted else eng.derivative(p.index)
        D[:, j] = xp
        E[:, j] = elasticity(x, xp, p.value)
        rates[j] = r
    diag = {"column_sums": D.sum(axis=0)}
    if shifted:
        diag["sigma_min_ratio"] = eng.sigma_min_ratio
        diag["mu"] = model.mu
    else:
        diag["lambda"] = eng.lam
        diag["consistency_residual"] = eng.max_consistency
        diag["augmented_rank"] = eng.rank
    return SensitivityReport(ps, x, D, E, rates, rate_kind, N,
                             "shifted" if shifted else "eigenvector", diag)


def _evaluate(model, p: Parameter, t: float, N: float) -> np.ndarray:
    if isinstance(model, ShiftedModel):
        w = np.array(model.w)
        f = np.array(model.f)
        (w if p.kind == "weight" else f)[p.index] = t
        return calibrate_mu(model.B, w, f, N, tol=1e-14)[1]
    w = np.array(model.w)
    w[p.index] = t
    return perron_pair(model.B.entries * w[None, :], left=False, total=N).right


def finite_difference_check(model, param: Parameter, h: float | None = None) -> np.ndarray:
    """Central-difference estimate of ``dx/dt`` with ``sum(x)`` held at N.

    The normalization (lam or mu) is recomputed at every evaluation. When
    ``t0 - h`` leaves the parameter domain a forward difference is used.
    """
    shifted = isinstance(model, ShiftedModel)
    _check_param(param, model.n, shifted)
    t0 = _base_value(model, param)
    N = float(model.solve().sum()) if shifted else float(model.N)
    if h is None:
        h = 1e-5 * max(1.0, abs(t0))
    lower_ok = t0 - h > 0 if param.kind == "weight" else t0 - h >= 0
    if lower_ok:
        return (_evaluate(model, param, t0 + h, N) - _evaluate(model, param, t0 - h, N)) / (2 * h)
    warnings.warn(f"{param.label}: t0 - h leaves the domain; using a forward difference", stacklevel=2)
    return (_evaluate(model, param, t0 + h, N) - _evaluate(model, param, t0, N)) / h
