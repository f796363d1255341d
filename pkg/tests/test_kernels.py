import numpy as np
import pytest

from urbancentrality import kernels
from urbancentrality import _kernels_py

needs_ext = pytest.mark.skipif("cython" not in kernels.BACKENDS, reason="compiled extension not built")


def test_default_backend_is_registered():
    assert kernels.BACKEND in kernels.BACKENDS
    assert "python" in kernels.BACKENDS


def test_unknown_backend():
    with pytest.raises(ValueError, match="backend"):
        kernels.power_iteration(np.eye(2), np.ones(2), 1.0, 1e-12, 10, backend="fortran")


@needs_ext
def test_power_iteration_agrees():
    rng = np.random.default_rng(0)
    for _ in range(50):
        n = int(rng.integers(1, 12))
        M = rng.uniform(0, 1, (n, n)) + np.roll(np.eye(n), 1, axis=1)
        M /= M.sum(axis=1).max()
        x0 = rng.uniform(0.1, 1, n)
        a = kernels.power_iteration(M, x0, 1.0, 1e-13, 10_000, backend="python")
        b = kernels.power_iteration(M, x0, 1.0, 1e-13, 10_000, backend="cython")
        assert a[2] == b[2]
        assert a[0] == pytest.approx(b[0], rel=1e-13)
        np.testing.assert_allclose(a[1], b[1], rtol=1e-12)


@needs_ext
def test_balance_iteration_agrees():
    rng = np.random.default_rng(1)
    for _ in range(50):
        n = int(rng.integers(1, 12))
        S = rng.uniform(0.1, 2, (n, n))
        S = S + S.T
        x0 = np.full(n, 1.0 / n)
        a = kernels.balance_iteration(S, 1.5, x0, 1e-12, 10_000, backend="python")
        b = kernels.balance_iteration(S, 1.5, x0, 1e-12, 10_000, backend="cython")
        assert a[1] == b[1]
        np.testing.assert_allclose(a[0], b[0], rtol=1e-12)
        np.testing.assert_allclose(a[3], b[3], rtol=1e-9, atol=1e-13)


def test_python_kernel_max_iter():
    M = np.array([[0, 1.0], [1.0, 0]])
    lam, x, it, res = _kernels_py.power_iteration(M, np.array([0.9, 0.1]), 0.0, 1e-15, 5)
    # without a shift the 2-cycle never settles
    assert it == 5 and res > 0.1


def test_history_truncated_to_iterations():
    S = np.ones((2, 2))
    x, it, res, hist = kernels.balance_iteration(S, 1.0, np.array([0.5, 0.5]), 1e-12, 100)
    assert len(hist) == it + 1
    assert hist[-1] == res


def test_large_matrices_default_to_numpy():
    assert kernels.get_backend(None, kernels.BLAS_CROSSOVER + 1) is _kernels_py
    assert kernels.get_backend(None, 3) is kernels.BACKENDS[kernels.BACKEND]
