import numpy as np
import pytest

from fuzzml.sylvester import (
    KRON_GUARD,
    SingularProblemError,
    kron_oracle,
    least_norm_solve,
    residual_norm,
    solve_sylvester,
)


def _assert_close_rel(got, want, tol):
    got = np.asarray(got)
    want = np.asarray(want)
    assert np.all(np.abs(got - want) <= tol * (1.0 + np.abs(want)))


def _random_separated_problem(rng, max_dim=8):
    """Random problem with spectra pushed apart by shifting A."""
    m = int(rng.integers(1, max_dim + 1))
    n = int(rng.integers(1, max_dim + 1))
    a = rng.normal(size=(m, m))
    b = rng.normal(size=(n, n))
    a += 2.0 * np.linalg.norm(b) * np.eye(m)
    z = rng.normal(size=(m, n))
    return a, b, z


class TestExamples:
    def test_identity_a_zero_b(self):
        rng = np.random.default_rng(0)
        z = rng.normal(size=(2, 3))
        for solver in (solve_sylvester, kron_oracle, least_norm_solve):
            np.testing.assert_allclose(solver(np.eye(2), np.zeros((3, 3)), z), z,
                                       atol=1e-12)

    def test_scalar_shift(self):
        z = 10.0 * np.ones((2, 3))
        for solver in (solve_sylvester, kron_oracle, least_norm_solve):
            got = solver(2.0 * np.eye(2), 3.0 * np.eye(3), z)
            np.testing.assert_allclose(got, 2.0 * np.ones((2, 3)), atol=1e-12)

    def test_random_solve_matches_oracle(self):
        rng = np.random.default_rng(1)
        a = rng.normal(size=(4, 4))
        b = rng.normal(size=(3, 3))
        a += 2.0 * np.linalg.norm(b) * np.eye(4)
        z = rng.normal(size=(4, 3))
        w = solve_sylvester(a, b, z)
        w_ref = kron_oracle(a, b, z)
        _assert_close_rel(w, w_ref, 1e-10)

    def test_one_by_one(self):
        got = kron_oracle([[3.0]], [[4.0]], [[14.0]])
        np.testing.assert_allclose(got, [[2.0]], atol=1e-14)

    def test_overlapping_spectra_raise(self):
        for solver in (solve_sylvester, kron_oracle):
            with pytest.raises(SingularProblemError, match="singular problem"):
                solver([[1.0]], [[-1.0]], [[1.0]])


class TestSweep:
    def test_200_seeded_problems_agree(self):
        rng = np.random.default_rng(42)
        for _ in range(200):
            a, b, z = _random_separated_problem(rng)
            w = solve_sylvester(a, b, z)
            w_ref = kron_oracle(a, b, z)
            _assert_close_rel(w, w_ref, 1e-10)
            assert residual_norm(a, b, z, w) <= 1e-8

    def test_linearity(self):
        rng = np.random.default_rng(43)
        for _ in range(20):
            a, b, z1 = _random_separated_problem(rng, max_dim=5)
            z2 = rng.normal(size=z1.shape)
            w12 = solve_sylvester(a, b, z1 + z2)
            w1 = solve_sylvester(a, b, z1)
            w2 = solve_sylvester(a, b, z2)
            _assert_close_rel(w12, w1 + w2, 1e-10)


class TestLeastNormSolve:
    def test_matches_exact_solution_when_nonsingular(self):
        rng = np.random.default_rng(44)
        for _ in range(20):
            a, b, z = _random_separated_problem(rng, max_dim=6)
            np.testing.assert_allclose(least_norm_solve(a, b, z),
                                       solve_sylvester(a, b, z), atol=1e-9)

    def test_consistent_singular_system(self):
        # A and -B share the eigenvalue 0, but Z lies in the operator range.
        a = np.diag([0.0, 1.0])
        b = np.diag([0.0, 2.0])
        w_true = np.array([[0.0, 1.0], [2.0, 3.0]])
        z = a @ w_true + w_true @ b
        w = least_norm_solve(a, b, z)
        assert residual_norm(a, b, z, w) <= 1e-8
        # the (0,0) direction is undetermined; minimum norm leaves it at zero
        assert abs(w[0, 0]) <= 1e-12
        # the determined entries match the construction
        np.testing.assert_allclose(w[0, 1], w_true[0, 1], atol=1e-10)
        np.testing.assert_allclose(w[1, :], w_true[1, :], atol=1e-10)
        # the strict dense solve rejects the rank-deficient system
        with pytest.raises(SingularProblemError):
            kron_oracle(a, b, z)

    def test_inconsistent_singular_system_raises(self):
        a = np.zeros((1, 1))
        b = np.zeros((1, 1))
        with pytest.raises(SingularProblemError):
            least_norm_solve(a, b, [[1.0]])

    def test_zero_rhs_gives_zero(self):
        np.testing.assert_array_equal(
            least_norm_solve(np.zeros((2, 2)), np.zeros((2, 2)), np.zeros((2, 2))),
            np.zeros((2, 2)),
        )


class TestGuards:
    def test_kron_oracle_size_guard(self):
        n = int(np.sqrt(KRON_GUARD)) + 1
        with pytest.raises(ValueError, match="too large"):
            kron_oracle(np.eye(n), np.eye(n), np.zeros((n, n)))

    def test_shape_validation(self):
        with pytest.raises(ValueError):
            solve_sylvester(np.zeros((2, 3)), np.eye(3), np.zeros((2, 3)))
        with pytest.raises(ValueError):
            solve_sylvester(np.eye(2), np.eye(3), np.zeros((3, 2)))
