import io
import math

import numpy as np
import pytest

from igdopt.rates import (RATE_REPORT_COLUMNS, fit_linear_rate,
                          fit_power_rate, make_kl_function,
                          predicted_exponent, rate_report_rows,
                          run_kl_experiment, write_rate_report)
from igdopt.trace import IterationRecord, IterationTrace


def synthetic_trace(values):
    tr = IterationTrace(method="synthetic")
    for k, v in enumerate(values, start=1):
        tr.append(IterationRecord(k=k, f_val=v, grad_norm_or_residual=v,
                                  eps_k=1.0, i_k=0))
    return tr


class TestMakeKlFunction:
    def test_p2_is_half_norm_squared(self):
        fn, prob = make_kl_function(2.0, dim=3)
        assert fn.q == 0.5
        assert fn.kl_constant == pytest.approx(math.sqrt(2.0))
        assert prob.lipschitz_L == 1.0
        x = np.array([1.0, 2.0, -2.0])
        assert prob.value(x) == pytest.approx(4.5)
        np.testing.assert_allclose(prob.grad(x), x)

    def test_p4_exponents(self):
        fn, _ = make_kl_function(4.0)
        assert fn.q == 0.75
        assert predicted_exponent(fn.q, "iterate_dist") == pytest.approx(-0.5)
        assert predicted_exponent(fn.q, "f_gap") == pytest.approx(-1.0)

    def test_p_below_two_rejected(self):
        with pytest.raises(ValueError):
            make_kl_function(1.5)

    def test_gradient_matches_numeric(self):
        _, prob = make_kl_function(3.0, dim=2)
        rng = np.random.default_rng(0)
        for _ in range(50):
            x = rng.uniform(-1, 1, 2)
            h = 1e-7
            num = np.array([
                (prob.value(x + h * e) - prob.value(x - h * e)) / (2 * h)
                for e in np.eye(2)])
            np.testing.assert_allclose(prob.grad(x), num, atol=1e-8)

    def test_kl_inequality_sampled(self):
        for p in (2.0, 3.0, 4.0):
            fn, prob = make_kl_function(p, dim=3)
            rng = np.random.default_rng(int(p))
            for _ in range(2000):
                x = rng.uniform(-1, 1, 3)
                x /= max(np.linalg.norm(x), 1.0)
                f = prob.value(x)
                if f <= 0:
                    continue
                gnorm = np.linalg.norm(prob.grad(x))
                assert gnorm >= fn.kl_constant * f ** fn.q - 1e-12


class TestFitting:
    def test_geometric_input_recovers_rho(self):
        tr = synthetic_trace([0.5 ** k for k in range(1, 60)])
        fit = fit_linear_rate(tr, window=(5, 50))
        assert fit.estimate == pytest.approx(0.5, rel=1e-9)
        assert fit.residual <= 1e-9

    def test_constant_trace_rho_one(self):
        tr = synthetic_trace([1.0] * 40)
        fit = fit_linear_rate(tr, window=(5, 35))
        assert fit.estimate == pytest.approx(1.0)

    def test_power_input_recovers_slope(self):
        tr = synthetic_trace([k ** -0.5 for k in range(1, 200)])
        fit = fit_power_rate(tr, "f_gap", window=(10, 150))
        assert fit.estimate == pytest.approx(-0.5, rel=1e-9)

    def test_nonpositive_values_truncated(self):
        tr = synthetic_trace([1.0 / k for k in range(1, 30)])
        tr.records[10].f_val = 0.0  # injected degenerate point
        fit = fit_power_rate(tr, "f_gap", window=(2, 28))
        assert math.isfinite(fit.estimate)

    def test_iterate_dist_requires_norms(self):
        tr = synthetic_trace([1.0 / k for k in range(1, 30)])
        with pytest.raises(ValueError):
            fit_power_rate(tr, "iterate_dist", window=(2, 28))

    def test_too_few_points(self):
        tr = synthetic_trace([0.5, 0.25])
        with pytest.raises(ValueError):
            fit_linear_rate(tr, window=(1, 2))


class TestEndToEnd:
    def test_p2_linear_contraction(self):
        fn, trace, _ = run_kl_experiment(2.0, seed=0, max_outer=3000)
        fit = fit_linear_rate(trace, window=(10, len(trace)))
        assert fit.estimate <= 0.99
        assert fit.residual <= 0.05

    def test_p4_iterate_slope(self):
        fn, trace, norms = run_kl_experiment(4.0, seed=0, max_outer=12_000)
        fit = fit_power_rate(trace, "iterate_dist", window=(100, 10_000),
                             iterate_norms=norms)
        assert fit.estimate == pytest.approx(-0.5, abs=0.1)

    def test_report_rows_and_csv(self):
        rows = rate_report_rows((2.0, 4.0), max_outer=2000,
                                window=(50, 1900))
        assert len(rows) == 4  # p=2 linear + three p=4 quantities
        buf = io.StringIO()
        write_rate_report(rows, buf)
        lines = buf.getvalue().splitlines()
        assert lines[0] == ",".join(RATE_REPORT_COLUMNS)
        assert len(lines) == 5
