import numpy as np
import pytest

from urbancentrality import (
    RankDeficiencyError,
    SnapshotSet,
    apply_weights,
    fit_joint,
    fit_weights_known_f,
    goodness_of_fit,
    solve_shifted,
    spectral_radius,
    stack_joint,
    stack_known_f,
)

from conftest import TOY_DESIGN, TOY_F, TOY_RHS_PRINTED, TOY_W, TOY_X


def normal_equations(design, rhs):
    return np.linalg.solve(design.T @ design, design.T @ rhs)


@pytest.fixture
def toy_snaps():
    return SnapshotSet(TOY_X, TOY_F, ("V1", "V2", "V3"))


class TestStacking:
    def test_toy_design_matches_printed(self, A3, toy_snaps):
        design, rhs = stack_known_f(A3, toy_snaps)
        np.testing.assert_array_equal(design, TOY_DESIGN)
        assert list(design[0]) == [0, 297, 0]
        # the printed system has 8 in the last entry; the data give 113 - 95 = 18
        np.testing.assert_array_equal(rhs[:-1], TOY_RHS_PRINTED[:-1])
        assert rhs[-1] == 18

    def test_single_unit_snapshot(self, A3):
        design, rhs = stack_known_f(A3, SnapshotSet([[1, 1, 1]], [[0, 0, 0]]))
        np.testing.assert_array_equal(design, A3.entries)
        np.testing.assert_array_equal(rhs, [1, 1, 1])

    def test_duplicate_snapshot_doubles_blocks(self, A3):
        one = stack_known_f(A3, SnapshotSet(TOY_X[:1], TOY_F[:1]))
        two = stack_known_f(A3, SnapshotSet(np.vstack([TOY_X[:1]] * 2), np.vstack([TOY_F[:1]] * 2)))
        np.testing.assert_array_equal(two[0], np.vstack([one[0]] * 2))
        np.testing.assert_array_equal(two[1], np.concatenate([one[1]] * 2))

    def test_missing_forced(self, A3):
        with pytest.raises(ValueError, match="forced"):
            stack_known_f(A3, SnapshotSet(TOY_X))

    def test_joint_blocks(self, A3):
        design, rhs = stack_joint(A3, SnapshotSet(TOY_X))
        assert design.shape == (9, 6)
        np.testing.assert_array_equal(design[:3, 3:], np.eye(3))
        np.testing.assert_array_equal(rhs, TOY_X.ravel())

    def test_forced_above_observed_warns(self):
        with pytest.warns(UserWarning, match="snapshot 1 node V2"):
            SnapshotSet([[1, 2, 3]], [[0, 5, 0]], ("V1", "V2", "V3"))


class TestKnownF:
    def test_toy_matches_normal_equations(self, A3, toy_snaps):
        fit = fit_weights_known_f(A3, toy_snaps)
        design, rhs = stack_known_f(A3, toy_snaps)
        oracle = normal_equations(design, rhs)
        np.testing.assert_allclose(fit.w, oracle, rtol=1e-10)
        np.testing.assert_allclose(fit.w, [0.0454406, 0.1825479, -0.0347914], atol=1e-6)

    def test_printed_system_ols(self):
        # OLS of the system exactly as printed (rhs ending in 8)
        oracle = normal_equations(TOY_DESIGN, TOY_RHS_PRINTED)
        np.testing.assert_allclose(oracle, [0.0454406, 0.1770649, -0.0347914], atol=1e-6)

    def test_reference_weights_are_not_optimal(self, A3, toy_snaps):
        fit = fit_weights_known_f(A3, toy_snaps)
        design, rhs = stack_known_f(A3, toy_snaps)
        resid = design @ TOY_W - rhs
        assert resid[1] == pytest.approx(308)
        assert np.linalg.norm(resid) > fit.residual_norm

    def test_ols_beats_random_weights(self, A3, toy_snaps):
        fit = fit_weights_known_f(A3, toy_snaps)
        design, rhs = stack_known_f(A3, toy_snaps)
        rng = np.random.default_rng(0)
        for _ in range(100):
            w = fit.w + rng.normal(scale=0.5, size=3)
            assert np.linalg.norm(design @ w - rhs) >= fit.residual_norm

    def test_residual_fields(self, A3, toy_snaps):
        fit = fit_weights_known_f(A3, toy_snaps)
        design, rhs = stack_known_f(A3, toy_snaps)
        np.testing.assert_allclose(fit.per_row_residuals, design @ fit.w - rhs, atol=1e-10)
        assert fit.residual_norm == pytest.approx(np.linalg.norm(design @ fit.w - rhs))

    def test_constrained(self, A3, toy_snaps):
        free = fit_weights_known_f(A3, toy_snaps)
        nn = fit_weights_known_f(A3, toy_snaps, constrained=True)
        assert np.all(nn.w >= 0) and nn.constrained
        assert nn.residual_norm >= free.residual_norm - 1e-12

    def test_synthetic_recovery(self, A3):
        K = apply_weights(A3, TOY_W).entries * 0.6
        w_true = TOY_W * 0.6
        rng = np.random.default_rng(5)
        fs = rng.uniform(0, 100, (4, 3))
        xs = np.array([solve_shifted(K, f) for f in fs])
        fit = fit_weights_known_f(A3, SnapshotSet(xs, fs))
        np.testing.assert_allclose(fit.w, w_true, rtol=1e-8)
        diag = goodness_of_fit(fit, A3, SnapshotSet(xs, fs))
        assert diag.r_squared == pytest.approx(1.0, abs=1e-12)
        assert diag.rmse == pytest.approx(0.0, abs=1e-9)

    def test_zero_residual_interpolation(self):
        B = np.array([[0, 1, 0.5], [1, 0, 1], [0.5, 1, 0]])
        x = np.array([3.0, 4.0, 5.0])
        w = np.array([0.2, 0.3, 0.1])
        f = x - B @ (w * x)
        fit = fit_weights_known_f(B, SnapshotSet([x], [f]))
        np.testing.assert_allclose(fit.w, w, rtol=1e-12)
        assert fit.residual_norm < 1e-12

    def test_unobserved_node_unidentifiable(self, A3):
        # V2 never occupied: its column of the design vanishes
        with pytest.raises(RankDeficiencyError) as exc:
            fit_weights_known_f(A3, SnapshotSet([[1, 0, 2], [2, 0, 1]], [[0, 0, 0], [0, 0, 0]], ("V1", "V2", "V3")))
        assert exc.value.unidentifiable == ["w[V2]"]

    def test_permutation_equivariance(self, A3, toy_snaps):
        perm = np.array([2, 0, 1])
        fit = fit_weights_known_f(A3, toy_snaps)
        Bp = A3.entries[np.ix_(perm, perm)]
        fitp = fit_weights_known_f(Bp, SnapshotSet(TOY_X[:, perm], TOY_F[:, perm]))
        np.testing.assert_allclose(fitp.w, fit.w[perm], rtol=1e-10)


def _eigen_one_instance(rng, n):
    """Instance with an exact eigenvalue 1 of B diag(w), so snapshots along
    its eigenvector all satisfy x = B W x + f for one fixed (w, f)."""
    # two tightly linked clusters give a positive second eigenvalue
    for _ in range(100):
        # (a hollow positive 3 x 3 always has a negative second eigenvalue)
        h = n // 2
        B = rng.uniform(0.05, 0.2, (n, n))
        B[:h, :h] += rng.uniform(1, 2, (h, h))
        B[h:, h:] += rng.uniform(1, 2, (n - h, n - h))
        B = (B + B.T) / 2
        np.fill_diagonal(B, 0)
        w0 = rng.uniform(0.5, 2.0, n)
        vals, vecs = np.linalg.eig(B * w0)
        order = np.argsort(vals.real)
        theta = vals.real[order[-2]]
        if theta > 0.1 and abs(np.linalg.det(B)) > 1e-3:
            break
    else:
        raise RuntimeError("no instance found")
    w = w0 / theta
    v = vecs[:, order[-2]].real
    v /= np.abs(v).max()
    xp = rng.uniform(5, 10, n)
    f = xp - (B * w) @ xp
    cs = np.linspace(-2, 2, 5)
    return B, w, f, np.array([xp + c * v for c in cs])


class TestJoint:
    def test_recovery_exact(self):
        rng = np.random.default_rng(7)
        for n in (4, 5, 6):
            B, w, f, xs = _eigen_one_instance(rng, n)
            fit = fit_joint(B, SnapshotSet(xs))
            np.testing.assert_allclose(fit.w, w, rtol=1e-8)
            np.testing.assert_allclose(fit.f, f, rtol=1e-8, atol=1e-8)
            assert goodness_of_fit(fit, B, SnapshotSet(xs)).r_squared == pytest.approx(1, abs=1e-12)

    def test_recovery_perron_scalings(self):
        # rho(BW) = 1 and f = 0: every multiple of the Perron vector is exact
        B = np.array([[0, 1, 0.5], [1, 0, 1], [0.5, 1, 0]])
        w = np.array([1.0, 0.5, 2.0])
        w = w / spectral_radius(B * w)
        vals, vecs = np.linalg.eig(B * w)
        p = np.abs(vecs[:, np.argmax(vals.real)].real)
        xs = np.array([c * p for c in (50, 80, 120, 200)])
        for constrained in (False, True):
            fit = fit_joint(B, SnapshotSet(xs), constrained)
            np.testing.assert_allclose(fit.w, w, rtol=1e-8)
            np.testing.assert_allclose(fit.f, 0, atol=1e-8)

    def test_noisy_recovery(self, A3):
        rng = np.random.default_rng(9)
        B, w, f, xs = _eigen_one_instance(rng, 4)
        sigma = 1e-3
        noisy = xs + rng.normal(scale=sigma, size=xs.shape)
        fit = fit_joint(B, SnapshotSet(np.abs(noisy)))
        assert np.max(np.abs(fit.w - w)) < 1e3 * sigma
        assert np.max(np.abs(fit.f - f)) < 1e4 * sigma

    def test_single_snapshot_interpolates(self, A3):
        with pytest.warns(UserWarning, match="single snapshot"):
            fit = fit_joint(A3, SnapshotSet(TOY_X[:1]))
        assert fit.residual_norm < 1e-9

    def test_identical_snapshots_rank_error(self, A3):
        with pytest.raises(RankDeficiencyError, match="rank"):
            fit_joint(A3, SnapshotSet(np.vstack([TOY_X[0]] * 4)))

    def test_constrained_nonnegative(self, A3):
        fit = fit_joint(A3, SnapshotSet(TOY_X), constrained=True)
        assert np.all(fit.w >= 0) and np.all(fit.f >= 0)


def test_goodness_of_fit_reference_weights(A3, toy_snaps):
    from urbancentrality.fitting import FitResult

    design, rhs = stack_known_f(A3, toy_snaps)
    resid = design @ TOY_W - rhs
    fit = FitResult(TOY_W, None, float(np.linalg.norm(resid)), resid, 0.0, False, 3)
    diag = goodness_of_fit(fit, A3, toy_snaps)
    np.testing.assert_allclose(diag.snapshot_residual_norms,
                               np.linalg.norm(resid.reshape(3, 3), axis=1), rtol=1e-12)
    # V2 middle rows predict 308, 293, 307 persons too many
    np.testing.assert_allclose(resid[[1, 4, 7]], [308, 293, 307], rtol=1e-12)
    assert diag.max_relative_error[1] == pytest.approx(307 / 289, rel=1e-12)
