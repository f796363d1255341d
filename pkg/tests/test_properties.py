"""Randomized property suites over small instances (n <= 6, 200 cases each)."""
import warnings

import numpy as np
import pytest

from urbancentrality import (
    EigenModel,
    InfeasibleModelError,
    Parameter,
    ShiftedModel,
    Verdict,
    build_harmonic,
    classify,
    derivative_shifted,
    derivative_unshifted,
    finite_difference_check,
    full_report,
    perron_pair,
    shortest_path_distances,
    solve_shifted,
)

from conftest import random_connected

CASES = 200


def irreducible(rng, n):
    """Nonnegative matrix with a directed ring, so it is irreducible."""
    M = rng.uniform(0, 1, (n, n)) * (rng.random((n, n)) < 0.5)
    M += np.roll(np.eye(n), 1, axis=1) * rng.uniform(0.2, 1, n)
    return M


def symmetric_base(rng, n):
    return build_harmonic(shortest_path_distances(random_connected(rng, n, 0.4))).entries


def shifted_instance(rng, n):
    B = irreducible(rng, n)
    w = rng.uniform(0.3, 2, n)
    f = rng.uniform(0, 10, n) * (rng.random(n) < 0.7)
    f[rng.integers(n)] += 1.0
    return ShiftedModel.calibrated(B, w, f, f.sum() * rng.uniform(1.2, 6))


def test_perron_positivity_and_scale_uniqueness():
    rng = np.random.default_rng(100)
    for _ in range(CASES):
        n = int(rng.integers(1, 7))
        M = irreducible(rng, n) if n > 1 else rng.uniform(0.1, 2, (1, 1))
        pair = perron_pair(M)
        assert np.all(pair.right > 0) and np.all(pair.left > 0)
        assert pair.left @ pair.right == pytest.approx(1, abs=1e-12)
        c = rng.uniform(0.1, 10)
        scaled = perron_pair(c * M)
        assert scaled.lam == pytest.approx(c * pair.lam, rel=1e-10)
        np.testing.assert_allclose(scaled.right, pair.right, rtol=1e-8, atol=1e-13)
        other = perron_pair(M, x0=rng.uniform(0.01, 1, n))
        np.testing.assert_allclose(other.right, pair.right, rtol=1e-8, atol=1e-13)


def test_trichotomy():
    rng = np.random.default_rng(101)
    seen = set()
    for _ in range(CASES):
        n = int(rng.integers(2, 7))
        K = irreducible(rng, n)
        K /= perron_pair(K, left=False).lam
        target = rng.choice(["sub", "one", "super"])
        rho = {"sub": rng.uniform(0.1, 0.95), "one": 1.0, "super": rng.uniform(1.05, 3)}[target]
        M = rho * K
        f = rng.uniform(0, 5, n) * (rng.random(n) < 0.6)
        if rng.random() < 0.8:
            f[rng.integers(n)] += 1.0
        v = classify(M, f).verdict
        seen.add(v)
        positive = np.any(f > 0)
        expected = {
            ("sub", True): Verdict.UNIQUE_POSITIVE, ("sub", False): Verdict.TRIVIAL,
            ("one", True): Verdict.INFEASIBLE, ("one", False): Verdict.EIGENVECTOR_CASE,
            ("super", True): Verdict.SUPERCRITICAL, ("super", False): Verdict.SUPERCRITICAL,
        }[(target, bool(positive))]
        assert v is expected
        if v is Verdict.UNIQUE_POSITIVE:
            x = solve_shifted(M, f)
            assert np.all(x > 0)
        else:
            with pytest.raises(InfeasibleModelError):
                solve_shifted(M, f)
    assert {Verdict.UNIQUE_POSITIVE, Verdict.INFEASIBLE, Verdict.SUPERCRITICAL} <= seen


def test_neumann_agreement():
    rng = np.random.default_rng(102)
    for _ in range(CASES):
        n = int(rng.integers(1, 7))
        M = irreducible(rng, n) if n > 1 else rng.uniform(0.1, 2, (1, 1))
        M *= rng.uniform(0.05, 0.8) / perron_pair(M, left=False).lam
        f = rng.uniform(0, 10, n)
        f[0] += 0.5
        x = f.copy()
        term = f.copy()
        while np.abs(term).max() > 1e-16 * np.abs(x).max():
            term = M @ term
            x += term
        np.testing.assert_allclose(solve_shifted(M, f), x, rtol=1e-12)


def test_derivative_conservation():
    rng = np.random.default_rng(103)
    for k in range(CASES):
        n = int(rng.integers(2, 7))
        if k % 2:
            B = symmetric_base(rng, n)
            model = EigenModel(B, rng.uniform(0.3, 3, n), rng.uniform(1, 1000))
            params = [Parameter.weight(i) for i in range(n)]
        else:
            model = shifted_instance(rng, n)
            params = [Parameter.weight(i) for i in range(n)] + [Parameter.shift(i) for i in range(n)]
        rep = full_report(model, params)
        scale = max(1.0, np.abs(rep.derivatives).max())
        assert np.all(np.abs(rep.derivatives.sum(axis=0)) <= 1e-9 * scale * n)


def test_eigen_analytic_vs_fd():
    rng = np.random.default_rng(104)
    for _ in range(CASES):
        n = int(rng.integers(2, 7))
        B = symmetric_base(rng, n)
        w = rng.uniform(0.3, 3, n)
        model = EigenModel(B, w, 100.0)
        i = int(rng.integers(n))
        xp = derivative_unshifted(B, w, i, 100.0)
        fd = finite_difference_check(model, Parameter.weight(i))
        assert np.max(np.abs(xp - fd)) <= 1e-5 * max(1.0, np.abs(xp).max())


def test_shifted_analytic_vs_fd():
    rng = np.random.default_rng(105)
    for _ in range(CASES):
        n = int(rng.integers(2, 7))
        model = shifted_instance(rng, n)
        kind = "weight" if rng.random() < 0.5 else "shift"
        p = Parameter(kind, int(rng.integers(n)))
        xp = derivative_shifted(model, p)
        with warnings.catch_warnings():
            # zero shifts fall back to a forward difference
            warnings.simplefilter("ignore")
            h = 1e-5 * max(1.0, abs(model.f[p.index] if kind == "shift" else model.w[p.index]))
            fd = finite_difference_check(model, p, h)
            forward = kind == "shift" and model.f[p.index] == 0
        tol = (1e-3 if forward else 1e-5) * max(1.0, np.abs(xp).max())
        assert np.max(np.abs(xp - fd)) <= tol


def test_p3_mirror_symmetry():
    rng = np.random.default_rng(106)
    A = np.array([[0, 1, 0], [1, 0, 1], [0, 1, 0.0]])
    R = np.eye(3)[::-1]
    for k in range(CASES):
        a, b = rng.uniform(0.3, 3, 2)
        w = np.array([a, b, a])
        if k % 2:
            model = EigenModel(A, w, rng.uniform(1, 1000))
            params = [Parameter.weight(0), Parameter.weight(2)]
        else:
            e, m = rng.uniform(0, 50, 2)
            f = np.array([e, m + 1, e])
            model = ShiftedModel.calibrated(A, w, f, f.sum() * rng.uniform(1.2, 5))
            params = [Parameter.weight(0), Parameter.weight(2), Parameter.shift(0), Parameter.shift(2)]
        rep = full_report(model, params)
        np.testing.assert_allclose(rep.base_x, R @ rep.base_x, rtol=1e-10)
        D, E = rep.derivatives, rep.elasticities
        tol = 1e-9 * max(1.0, np.abs(D).max())
        for j in range(0, len(params), 2):
            assert np.max(np.abs(D[:, j] - R @ D[:, j + 1])) <= tol
            assert np.max(np.abs(E[:, j] - R @ E[:, j + 1])) <= 1e-9
        # the middle parameter column maps onto itself
        if k % 2:
            mid = derivative_unshifted(A, w, 1, model.N)
            np.testing.assert_allclose(mid, R @ mid, atol=tol)
