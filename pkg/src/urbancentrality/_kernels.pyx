# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled inner loops for the iterative solvers.

Signatures and return values match ``_kernels_py`` exactly; the selection
between the two happens in ``kernels``.
"""
import numpy as np

cimport numpy as cnp
from libc.math cimport fabs, sqrt

cnp.import_array()


def power_iteration(const double[:, ::1] M, const double[::1] x0, double shift,
                    double tol, Py_ssize_t max_iter):
    """Shifted power iteration on a nonnegative matrix.

    Returns ``(lam, x, n_iter, residual)`` with ``x`` scaled to unit sum and
    ``residual = max|Mx - lam x|``.
    """
    cdef Py_ssize_t n = M.shape[0]
    cdef Py_ssize_t i, j, it = 0
    cdef double s, lam = 0.0, res = 0.0, acc
    x_arr = np.empty(n, dtype=np.float64)
    y_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] x = x_arr
    cdef double[::1] y = y_arr

    s = 0.0
    for i in range(n):
        s += x0[i]
    for i in range(n):
        x[i] = x0[i] / s

    while True:
        lam = 0.0
        for i in range(n):
            acc = 0.0
            for j in range(n):
                acc += M[i, j] * x[j]
            y[i] = acc
            lam += acc
        res = 0.0
        for i in range(n):
            acc = fabs(y[i] - lam * x[i])
            if acc > res:
                res = acc
        if res <= tol or it >= max_iter:
            break
        s = 0.0
        for i in range(n):
            y[i] += shift * x[i]
            s += y[i]
        for i in range(n):
            x[i] = y[i] / s
        it += 1

    return lam, x_arr, it, res


def balance_iteration(const double[:, ::1] M, double lam, const double[::1] x0,
                      double tol, Py_ssize_t max_iter, double[::1] history):
    """Geometric-mean damped iteration ``x <- sqrt(x * lam / (M x))``.

    ``history[k]`` receives ``max|lam/x - Mx|`` before step ``k``. Returns
    ``(x, n_iter, residual)``.
    """
    cdef Py_ssize_t n = M.shape[0]
    cdef Py_ssize_t i, j, it = 0
    cdef double res, acc
    x_arr = np.array(x0, dtype=np.float64, copy=True)
    y_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] x = x_arr
    cdef double[::1] y = y_arr

    while True:
        res = 0.0
        for i in range(n):
            acc = 0.0
            for j in range(n):
                acc += M[i, j] * x[j]
            y[i] = acc
            acc = fabs(lam / x[i] - acc)
            if acc > res:
                res = acc
        if it < history.shape[0]:
            history[it] = res
        if res <= tol or it >= max_iter:
            break
        for i in range(n):
            x[i] = sqrt(x[i] * lam / y[i])
        it += 1

    return x_arr, it, res
