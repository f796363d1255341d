"""Least-squares estimation of node weights from occupancy snapshots.

Each snapshot ``x_k`` is assumed to satisfy ``x_k = B diag(w) x_k + f_k``.
Since ``B diag(w) x_k = B diag(x_k) w`` the model is linear in ``w``, and
stacking the snapshots gives an overdetermined system. When the forced
occupancy is unknown but constant, ``f`` joins the unknowns.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.linalg import qr, solve_triangular
from scipy.optimize import nnls

from .errors import RankDeficiencyError
from .netgraph import as_array

__all__ = [
    "SnapshotSet",
    "FitResult",
    "FitDiagnostics",
    "stack_known_f",
    "stack_joint",
    "fit_weights_known_f",
    "fit_joint",
    "goodness_of_fit",
]

ZERO_COLUMN_RTOL = 1e-12
RANK_RTOL = 1e-10


@dataclass(frozen=True)
class SnapshotSet:
    """Observed occupancies, one row per snapshot, columns in node order.

    ``forced`` (same shape) holds the known forced occupancy of each snapshot.
    """

    snapshots: np.ndarray
    forced: np.ndarray | None = None
    names: tuple | None = None

    def __post_init__(self):
        x = np.atleast_2d(np.array(self.snapshots, dtype=np.float64))
        if x.ndim != 2 or x.shape[0] == 0:
            raise ValueError("need at least one snapshot")
        if np.any(x < 0) or not np.all(np.isfinite(x)):
            raise ValueError("snapshots must be finite and nonnegative")
        x.setflags(write=False)
        object.__setattr__(self, "snapshots", x)
        if self.forced is not None:
            f = np.atleast_2d(np.array(self.forced, dtype=np.float64))
            if f.shape != x.shape:
                raise ValueError(f"forced occupancy has shape {f.shape}, snapshots have {x.shape}")
            if np.any(f < 0) or not np.all(np.isfinite(f)):
                raise ValueError("forced occupancy must be finite and nonnegative")
            over = np.argwhere(f > x)
            if len(over):
                where = ", ".join(f"snapshot {k + 1} node {self._name(i)}" for k, i in over)
                warnings.warn(f"forced occupancy exceeds observed occupancy at {where}", stacklevel=3)
            f.setflags(write=False)
            object.__setattr__(self, "forced", f)
        if self.names is not None:
            if len(self.names) != x.shape[1]:
                raise ValueError("names must match the number of nodes")
            object.__setattr__(self, "names", tuple(self.names))

    def _name(self, i):
        return self.names[i] if self.names is not None else str(i + 1)

    @property
    def count(self) -> int:
        return self.snapshots.shape[0]

    @property
    def n(self) -> int:
        return self.snapshots.shape[1]


@dataclass(frozen=True)
class FitResult:
    w: np.ndarray
    f: np.ndarray | None
    residual_norm: float
    per_row_residuals: np.ndarray
    r_squared: float
    constrained: bool
    rank: int


@dataclass(frozen=True)
class FitDiagnostics:
    r_squared: float
    rmse: float
    snapshot_residual_norms: np.ndarray
    max_relative_error: np.ndarray


def _check_dims(B, snaps):
    b = as_array(B)
    if b.shape != (snaps.n, snaps.n):
        raise ValueError(f"B has shape {b.shape} but snapshots have {snaps.n} nodes")
    return b


def stack_known_f(B, snaps: SnapshotSet):
    """Design ``[B diag(x_k)]_k`` and right-hand side ``[x_k - f_k]_k``."""
    b = _check_dims(B, snaps)
    if snaps.forced is None:
        raise ValueError("known-f fitting needs the forced occupancy of every snapshot")
    design = np.vstack([b * x[None, :] for x in snaps.snapshots])
    rhs = (snaps.snapshots - snaps.forced).ravel()
    return design, rhs


def stack_joint(B, snaps: SnapshotSet):
    """Design ``[B diag(x_k) | I]_k`` and right-hand side ``[x_k]_k``."""
    b = _check_dims(B, snaps)
    eye = np.eye(snaps.n)
    design = np.vstack([np.hstack([b * x[None, :], eye]) for x in snaps.snapshots])
    return design, snaps.snapshots.ravel().copy()


def _r_squared(resid, rhs):
    ss_res = float(resid @ resid)
    dev = rhs - rhs.mean()
    ss_tot = float(dev @ dev)
    if ss_tot == 0:
        return 1.0 if ss_res == 0 else 0.0
    return 1.0 - ss_res / ss_tot


def _solve(design, rhs, constrained, labels, underdetermined_ok=False):
    m, p = design.shape
    scale = np.linalg.norm(design)
    zero = np.linalg.norm(design, axis=0) < ZERO_COLUMN_RTOL * scale
    if np.any(zero):
        bad = [labels[j] for j in np.flatnonzero(zero)]
        raise RankDeficiencyError(
            f"unidentifiable parameters (no observed neighbour occupancy): {', '.join(bad)}", bad
        )
    Q, R, piv = qr(design, mode="economic", pivoting=True)
    diag = np.abs(np.diag(R))
    rank = int(np.sum(diag > RANK_RTOL * diag[0]))
    if rank < p and not (underdetermined_ok and m < p):
        bad = [labels[j] for j in piv[rank:]]
        raise RankDeficiencyError(
            f"stacked design has rank {rank} < {p} unknowns; not identifiable: {', '.join(bad)}", bad
        )
    if constrained:
        theta, _ = nnls(design, rhs, maxiter=50 * p)
    elif rank < p:
        theta = np.linalg.lstsq(design, rhs, rcond=None)[0]
    else:
        y = solve_triangular(R, Q.T @ rhs)
        theta = np.empty(p)
        theta[piv] = y
    resid = design @ theta - rhs
    return theta, resid, rank


def _labels(snaps, prefix):
    return [f"{prefix}[{snaps._name(i)}]" for i in range(snaps.n)]


def fit_weights_known_f(B, snaps: SnapshotSet, constrained: bool = False) -> FitResult:
    """Estimate ``w`` when every snapshot's forced occupancy is known.

    Unconstrained mode returns the ordinary least-squares solution (via
    pivoted QR); constrained mode the nonnegative least-squares one.

    Raises
    ------
    RankDeficiencyError
        If the stacked design lacks full column rank.
    """
    design, rhs = stack_known_f(B, snaps)
    theta, resid, rank = _solve(design, rhs, constrained, _labels(snaps, "w"))
    return FitResult(theta, None, float(np.linalg.norm(resid)), resid,
                     _r_squared(resid, rhs), constrained, rank)


def fit_joint(B, snaps: SnapshotSet, constrained: bool = False) -> FitResult:
    """Estimate ``w`` and a constant forced occupancy ``f`` together.

    With a single snapshot the system has ``n`` equations for ``2n``
    unknowns; the minimum-norm interpolant is returned with a warning.
    """
    n = snaps.n
    if snaps.count < 2:
        warnings.warn(
            "a single snapshot leaves the joint system underdetermined; "
            "returning an exact interpolant", stacklevel=2,
        )
    design, rhs = stack_joint(B, snaps)
    labels = _labels(snaps, "w") + _labels(snaps, "f")
    theta, resid, rank = _solve(design, rhs, constrained, labels, underdetermined_ok=snaps.count < 2)
    return FitResult(theta[:n], theta[n:], float(np.linalg.norm(resid)), resid,
                     _r_squared(resid, rhs), constrained, rank)


def goodness_of_fit(fit: FitResult, B, snaps: SnapshotSet) -> FitDiagnostics:
    """R^2, RMSE, per-snapshot residual norms and worst relative error per node.

    Relative errors compare predicted with observed occupancy; nodes that
    are never occupied get ``nan``.
    """
    b = _check_dims(B, snaps)
    x = snaps.snapshots
    if fit.f is not None:
        forced = np.broadcast_to(fit.f, x.shape)
    elif snaps.forced is not None:
        forced = snaps.forced
    else:
        raise ValueError("fit has no f and snapshots carry no forced occupancy")
    pred = np.array([b @ (fit.w * xk) for xk in x]) + forced
    resid = pred - x
    rhs = (x - forced).ravel() if fit.f is None else x.ravel()
    with np.errstate(divide="ignore", invalid="ignore"):
        rel = np.where(x > 0, np.abs(resid) / x, np.nan)
    occupied = np.any(x > 0, axis=0)
    max_rel = np.full(snaps.n, np.nan)
    max_rel[occupied] = np.nanmax(rel[:, occupied], axis=0)
    return FitDiagnostics(
        _r_squared(resid.ravel(), rhs),
        float(np.sqrt(np.mean(resid ** 2))),
        np.linalg.norm(resid, axis=1),
        max_rel,
    )
