"""Kernel backend selection.

The compiled Cython kernels are used when the extension was built; the
numpy fallback is used otherwise, or when ``URBANCENTRALITY_PURE=1`` is set
in the environment before import. Above ``BLAS_CROSSOVER`` nodes the numpy
kernels win (the matrix-vector product goes to BLAS), so calls that do not
name a backend switch to them there.
"""
import os

import numpy as np

from . import _kernels_py

BACKENDS = {"python": _kernels_py}

try:
    from . import _kernels as _kernels_c
except ImportError:  # extension not built
    _kernels_c = None
else:
    BACKENDS["cython"] = _kernels_c

if _kernels_c is not None and os.environ.get("URBANCENTRALITY_PURE", "") in ("", "0"):
    BACKEND = "cython"
else:
    BACKEND = "python"


BLAS_CROSSOVER = 128


def get_backend(name=None, n=0):
    """Return the kernel module for ``name`` (default: the active backend)."""
    if name is None:
        name = "python" if n > BLAS_CROSSOVER else BACKEND
    try:
        return BACKENDS[name]
    except KeyError:
        raise ValueError(
            f"kernel backend {name!r} unavailable; have {sorted(BACKENDS)}"
        ) from None


def power_iteration(M, x0, shift, tol, max_iter, backend=None):
    M = np.ascontiguousarray(M, dtype=np.float64)
    x0 = np.ascontiguousarray(x0, dtype=np.float64)
    return get_backend(backend, M.shape[0]).power_iteration(M, x0, float(shift), float(tol), int(max_iter))


def balance_iteration(M, lam, x0, tol, max_iter, backend=None):
    """Run the balancing kernel; returns ``(x, n_iter, residual, history)``."""
    M = np.ascontiguousarray(M, dtype=np.float64)
    x0 = np.ascontiguousarray(x0, dtype=np.float64)
    history = np.empty(int(max_iter) + 1, dtype=np.float64)
    x, it, res = get_backend(backend, M.shape[0]).balance_iteration(
        M, float(lam), x0, float(tol), int(max_iter), history
    )
    return np.asarray(x), it, res, history[: it + 1]
