"""Pure-numpy versions of the compiled kernels in ``_kernels.pyx``."""
import numpy as np


def power_iteration(M, x0, shift, tol, max_iter):
    x = np.asarray(x0, dtype=np.float64) / np.sum(x0)
    it = 0
    while True:
        y = M @ x
        lam = float(y.sum())
        res = float(np.max(np.abs(y - lam * x)))
        if res <= tol or it >= max_iter:
            break
        y += shift * x
        x = y / y.sum()
        it += 1
    return lam, x, it, res


def balance_iteration(M, lam, x0, tol, max_iter, history):
    x = np.array(x0, dtype=np.float64, copy=True)
    it = 0
    while True:
        y = M @ x
        res = float(np.max(np.abs(lam / x - y)))
        if it < history.shape[0]:
            history[it] = res
        if res <= tol or it >= max_iter:
            break
        x = np.sqrt(x * lam / y)
        it += 1
    return x, it, res
