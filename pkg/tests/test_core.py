import numpy as np
import pytest

from igdopt.core import (DimensionError, MatrixOperator, NonFiniteError,
                         OPNORM_SAFETY, as_vector, matvec, operator_norm)
from tests.conftest import start_point


class TestMatvec:
    def test_identity(self):
        np.testing.assert_array_equal(
            matvec(np.eye(2), [3.0, 4.0]), [3.0, 4.0])

    def test_zero_matrix(self):
        np.testing.assert_array_equal(
            matvec(np.zeros((3, 2)), [5.0, -1.0]), np.zeros(3))

    def test_hand_example(self):
        np.testing.assert_array_equal(
            matvec([[1.0, 2.0], [3.0, 4.0]], [1.0, 1.0]), [3.0, 7.0])

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionError):
            matvec(np.eye(2), [1.0, 2.0, 3.0])

    def test_deterministic(self):
        rng = np.random.default_rng(3)
        a = rng.standard_normal((40, 30))
        x = rng.standard_normal(30)
        first = matvec(a, x)
        second = matvec(a, x)
        assert np.array_equal(first, second)

    def test_nonfinite_rejected(self):
        with pytest.raises(NonFiniteError):
            as_vector([1.0, np.nan])


class TestOperatorNorm:
    def test_diagonal(self):
        est = operator_norm(np.diag([3.0, 1.0]))
        assert est == pytest.approx(3.0 * OPNORM_SAFETY, rel=1e-8)

    def test_zero(self):
        assert operator_norm(np.zeros((3, 3))) == 0.0

    def test_matches_svd_oracle(self):
        rng = np.random.default_rng(11)
        a = rng.standard_normal((10, 20))
        true = float(np.linalg.svd(a, compute_uv=False)[0])
        est = operator_norm(a)
        assert abs(est / OPNORM_SAFETY - true) <= 0.01 * true

    def test_upper_bounds_rayleigh_quotients(self):
        rng = np.random.default_rng(12)
        a = rng.standard_normal((8, 15))
        est = operator_norm(a)
        for _ in range(100):
            x = rng.standard_normal(15)
            x /= np.linalg.norm(x)
            assert np.linalg.norm(a @ x) <= est + 1e-8

    def test_matrix_free_operator(self):
        a = np.diag([2.0, 5.0, 1.0])
        op = MatrixOperator(a)
        assert operator_norm(op) == pytest.approx(5.0 * OPNORM_SAFETY,
                                                  rel=1e-8)


class TestDescentLemma:
    def test_sampled_pairs(self, zoo):
        rng = np.random.default_rng(0)
        for problem in zoo:
            for _ in range(100):
                x = start_point(problem, rng.integers(1 << 30))
                y = start_point(problem, rng.integers(1 << 30))
                lhs = (problem.value(y) - problem.value(x)
                       - float(problem.grad(x) @ (y - x)))
                rhs = 0.5 * problem.lipschitz_L * float(np.sum((y - x) ** 2))
                assert lhs <= rhs + 1e-10, problem.name
