import logging
import math

import numpy as np
import pytest

from igdopt import (BudgetExhausted, Converged, IgdConfig, SmoothProblem,
                    StationaryCertificate, igd_inner_search, igd_solve,
                    igd_step, ik_upper_bound)
from igdopt.oracles import ExactOracle, NoisyOracle
from tests.conftest import make_oracle, start_point


def quad_problem():
    return SmoothProblem(
        dim=2, value=lambda x: 0.5 * (x[0] ** 2 + 4.0 * x[1] ** 2),
        grad=lambda x: np.array([x[0], 4.0 * x[1]]), lipschitz_L=4.0,
        name="aniso-quad")


class TestConfig:
    def test_theta_range(self):
        with pytest.raises(ValueError):
            IgdConfig(lipschitz_L=1.0, theta=1.2)
        with pytest.raises(ValueError):
            IgdConfig(lipschitz_L=1.0, theta=0.0)

    def test_mu_floor(self):
        with pytest.raises(ValueError):
            IgdConfig(lipschitz_L=1.0, mu=1.0)

    def test_small_mu_warns(self, caplog):
        with caplog.at_level(logging.WARNING):
            IgdConfig(lipschitz_L=1.0, mu=1.1)
        assert any("mu" in rec.message for rec in caplog.records)


class TestIkUpperBound:
    def test_case1_zero(self):
        # eps < grad_norm / (mu+1) forces i_k = 0.
        assert ik_upper_bound(5.0, 1.0, 0.8, 3.0) == 0

    def test_hand_example(self):
        # theta=0.5, mu=3, eps=1, grad=0.4: ceil(log_0.5(0.1)+1) = 5.
        assert ik_upper_bound(0.4, 1.0, 0.5, 3.0) == 5

    def test_huge_gradient(self):
        assert ik_upper_bound(1e12, 1.0, 0.8, 3.0) == 0

    def test_simulation_audit(self):
        # Measured i_k over noisy inner searches never exceeds the bound.
        prob = quad_problem()
        cfg = IgdConfig(lipschitz_L=4.0, theta=0.5, mu=3.0)
        rng = np.random.default_rng(0)
        oracle = NoisyOracle(prob, np.random.default_rng(1))
        for _ in range(300):
            x = rng.standard_normal(2) * 10.0 ** rng.uniform(-2, 1)
            gnorm = float(np.linalg.norm(prob.grad(x)))
            if gnorm == 0.0:
                continue
            eps = 10.0 ** rng.uniform(-2, 0.5)
            found = igd_inner_search(oracle, x, eps, cfg)
            if isinstance(found, StationaryCertificate):
                continue
            _, i_k = found
            assert i_k <= ik_upper_bound(gnorm, eps, cfg.theta, cfg.mu)


class TestInnerSearch:
    def test_exact_oracle_accepts_at_zero(self):
        prob = quad_problem()
        oracle = ExactOracle(prob)
        cfg = IgdConfig(lipschitz_L=4.0, mu=3.0)
        x = np.array([10.0, 0.0])  # grad norm 10 > mu * eps = 3
        g, i = igd_inner_search(oracle, x, 1.0, cfg)
        assert i == 0
        np.testing.assert_array_equal(g, [10.0, 0.0])

    def test_case1_always_i0_noisy(self):
        prob = quad_problem()
        cfg = IgdConfig(lipschitz_L=4.0, mu=3.0)
        oracle = NoisyOracle(prob, np.random.default_rng(2))
        rng = np.random.default_rng(3)
        for _ in range(200):
            x = rng.standard_normal(2) + np.array([2.0, 0.0])
            gnorm = float(np.linalg.norm(prob.grad(x)))
            eps = 0.9 * gnorm / (cfg.mu + 1.0)
            g, i = igd_inner_search(oracle, x, eps, cfg)
            assert i == 0

    def test_stationary_point_certificate(self):
        prob = quad_problem()
        cfg = IgdConfig(lipschitz_L=4.0, mu=3.0, i_max=10)
        oracle = NoisyOracle(prob, np.random.default_rng(4))
        found = igd_inner_search(oracle, np.zeros(2), 1.0, cfg)
        assert isinstance(found, StationaryCertificate)
        assert found.bound == pytest.approx((3.0 + 1.0) * 0.8 ** 10 * 1.0)

    def test_equality_rejects(self):
        class EqualOracle:
            def query(self, x, eps):
                return np.array([3.0 * eps])  # norm == mu * eps exactly

        cfg = IgdConfig(lipschitz_L=1.0, mu=3.0, i_max=5)
        found = igd_inner_search(EqualOracle(), np.zeros(1), 1.0, cfg)
        assert isinstance(found, StationaryCertificate)


class TestStep:
    def test_zero_gradient(self):
        x = np.array([1.0, 2.0])
        np.testing.assert_array_equal(igd_step(x, np.zeros(2), 2.0), x)

    def test_one_step_minimization(self):
        assert igd_step(np.array([1.0]), np.array([1.0]), 1.0)[0] == 0.0

    def test_arithmetic(self):
        np.testing.assert_array_equal(
            igd_step(np.array([1.0, 2.0]), np.array([2.0, -2.0]), 2.0),
            [0.0, 3.0])


class TestSolve:
    def test_sphere_one_step(self):
        prob = SmoothProblem(dim=2, value=lambda x: 0.5 * float(x @ x),
                             grad=lambda x: np.asarray(x, float),
                             lipschitz_L=1.0)
        x, trace, status = igd_solve(prob, ExactOracle(prob),
                                     IgdConfig(lipschitz_L=1.0, grad_tol=1e-9),
                                     x1=np.array([1.0, 0.0]))
        assert np.linalg.norm(x) <= 1e-9

    def test_noisy_descent_and_eps_shrink(self):
        prob = quad_problem()
        cfg = IgdConfig(lipschitz_L=4.0, mu=3.0, eps1=1.0, theta=0.8,
                        eps_tol=1e-6, max_outer=20_000)
        oracle = NoisyOracle(prob, np.random.default_rng(7))
        x, trace, status = igd_solve(prob, oracle, cfg,
                                     x1=np.array([3.0, -2.0]))
        assert isinstance(status, Converged)
        fs = trace.column("f_val")
        assert all(b < a for a, b in zip(fs, fs[1:]))
        eps = trace.column("eps_k")
        assert all(b <= a for a, b in zip(eps, eps[1:]))
        assert eps[-1] < 1e-5

    def test_quadratic_reaches_minimizer(self):
        prob = quad_problem()
        cfg = IgdConfig(lipschitz_L=4.0, mu=3.0, eps_tol=1e-6,
                        max_outer=50_000)
        oracle = NoisyOracle(prob, np.random.default_rng(8))
        x, _, status = igd_solve(prob, oracle, cfg, x1=np.array([1.0, 1.0]))
        assert isinstance(status, Converged)
        assert np.linalg.norm(x) <= 1e-4

    def test_budget_exhausted_reports_final_norm(self):
        prob = quad_problem()
        cfg = IgdConfig(lipschitz_L=4.0, max_outer=3)
        oracle = NoisyOracle(prob, np.random.default_rng(9))
        x, trace, status = igd_solve(prob, oracle, cfg,
                                     x1=np.array([5.0, 5.0]))
        assert isinstance(status, BudgetExhausted)
        assert status.kind == "outer"
        assert math.isfinite(status.final_norm)
        assert trace.metadata["final_norm"] == pytest.approx(
            float(np.linalg.norm(x)))

    def test_eps_update_rule_across_records(self):
        prob = quad_problem()
        cfg = IgdConfig(lipschitz_L=4.0, mu=3.0, max_outer=200)
        oracle = NoisyOracle(prob, np.random.default_rng(10))
        _, trace, _ = igd_solve(prob, oracle, cfg, x1=np.array([2.0, 2.0]))
        for prev, cur in zip(trace.records, trace.records[1:]):
            assert cur.eps_k == pytest.approx(
                cfg.theta ** prev.i_k * prev.eps_k)

    def test_callback_can_stop(self):
        prob = quad_problem()
        cfg = IgdConfig(lipschitz_L=4.0, max_outer=1000)
        oracle = ExactOracle(prob)
        _, trace, status = igd_solve(
            prob, oracle, cfg, x1=np.array([2.0, 2.0]),
            callback=lambda k, x, g, eps, xn: "early" if k >= 5 else None)
        assert isinstance(status, Converged)
        assert status.reason == "early"
        assert len(trace) == 5


class TestRelativeErrorConditions:
    def test_audited_relative_errors(self, zoo):
        # nu2: ||g - grad|| <= (1/mu)||g||; nu1 (mu>2): <= (1/(mu-1))||grad||.
        mu = 3.0
        for problem in zoo[:5]:
            oracle = NoisyOracle(problem, np.random.default_rng(20))
            audit = []

            def cb(k, x, g, eps, xn, _problem=problem, _audit=audit):
                _audit.append((np.asarray(g), _problem.grad(x)))
                return None

            cfg = IgdConfig(lipschitz_L=problem.lipschitz_L, mu=mu,
                            max_outer=100)
            igd_solve(problem, oracle, cfg,
                      x1=start_point(problem, 0), callback=cb)
            for g, grad in audit:
                err = np.linalg.norm(g - grad)
                assert err <= np.linalg.norm(g) / mu + 1e-12
                assert err <= np.linalg.norm(grad) / (mu - 1.0) + 1e-12
