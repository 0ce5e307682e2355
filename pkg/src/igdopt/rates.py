"""Convergence-rate lab for gradient-dominated test functions.

The family f(x) = ||x||^p / p satisfies a Lojasiewicz-type gradient
inequality ||grad f(x)|| >= M (f(x) - f*)^q with exponent q = 1 - 1/p and
constant M = p^q.  For exponent q <= 1/2 the theory predicts linear
convergence of the function gap; for q in (1/2, 1) it predicts the power
rates

    ||x^k - xbar||    = O(k^{-(1-q)/(2q-1)}),
    f(x^k) - f(xbar)  = O(k^{-(2-2q)/(2q-1)}),
    ||grad f(x^k)||   = O(k^{-(1-q)/(2q-1)}).
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .core import SmoothProblem
from .igd import IgdConfig, igd_solve
from .oracles import NoisyOracle
from .trace import IterationTrace

logger = logging.getLogger(__name__)

RATE_REPORT_COLUMNS = ("function_p", "q", "quantity", "predicted_exp",
                       "fitted_exp", "residual")

QUANTITIES = ("iterate_dist", "f_gap", "grad_norm")


@dataclass(frozen=True)
class KlTestFunction:
    """f(x) = ||x||^p / p with its analytic gradient-inequality data."""

    p: float
    dim: int
    region_radius: float

    @property
    def q(self) -> float:
        return 1.0 - 1.0 / self.p

    @property
    def kl_constant(self) -> float:
        """M with ||grad f(x)|| = M * f(x)^q exactly (equality for this family)."""
        return self.p ** self.q

    @property
    def lipschitz_L(self) -> float:
        return (self.p - 1.0) * self.region_radius ** (self.p - 2.0)


def make_kl_function(p: float, dim: int = 2, region_radius: float = 1.0):
    """The power-of-norm test problem on the ball of ``region_radius``.

    Returns ``(KlTestFunction, SmoothProblem)``.  Rejects p < 2, where the
    gradient fails to be Lipschitz at the origin.
    """
    if p < 2.0:
        raise ValueError("p must be at least 2 (gradient Lipschitz at 0)")
    if dim < 1 or region_radius <= 0:
        raise ValueError("dim and region_radius must be positive")
    fn = KlTestFunction(p=p, dim=dim, region_radius=region_radius)

    def value(x):
        return float(np.linalg.norm(x) ** p) / p

    def grad(x):
        x = np.asarray(x, dtype=float)
        r = float(np.linalg.norm(x))
        if r == 0.0:
            return np.zeros_like(x)
        return r ** (p - 2.0) * x

    problem = SmoothProblem(dim=dim, value=value, grad=grad,
                            lipschitz_L=fn.lipschitz_L,
                            name=f"norm-power-{p:g}")
    return fn, problem


def predicted_exponent(q: float, quantity: str) -> float:
    """Theoretical decay exponent (negative) for q in (1/2, 1)."""
    if not 0.5 < q < 1.0:
        raise ValueError("power rates require q in (1/2, 1)")
    if quantity in ("iterate_dist", "grad_norm"):
        return -(1.0 - q) / (2.0 * q - 1.0)
    if quantity == "f_gap":
        return -(2.0 - 2.0 * q) / (2.0 * q - 1.0)
    raise ValueError(f"unknown quantity {quantity!r}")


@dataclass
class RateFit:
    """A log-space least-squares fit of a decay rate.

    ``kind`` is "linear" (estimate = contraction factor rho per iteration)
    or "power" (estimate = log-log slope).  ``residual`` is the RMSE of the
    log-space fit normalized by the fitted total decrease over the window,
    so a value well below 1 means the trend explains the data.
    """

    kind: str
    estimate: float
    window: tuple
    residual: float


def _fit_line(xs: np.ndarray, ys: np.ndarray):
    slope, intercept = np.polyfit(xs, ys, 1)
    fitted = slope * xs + intercept
    rmse = float(np.sqrt(np.mean((ys - fitted) ** 2)))
    span = abs(slope * (xs[-1] - xs[0]))
    return float(slope), rmse / max(span, 1.0)


def _window_values(ks, values, window):
    ks = np.asarray(ks, dtype=float)
    values = np.asarray(values, dtype=float)
    k0, k1 = window
    mask = (ks >= k0) & (ks <= k1) & (values > 0) & np.isfinite(values)
    if np.count_nonzero(mask) < np.count_nonzero((ks >= k0) & (ks <= k1)):
        logger.warning("rate fit window truncated: dropped nonpositive or "
                       "nonfinite values")
    if np.count_nonzero(mask) < 3:
        raise ValueError("fewer than 3 usable points in the fit window")
    return ks[mask], values[mask]


def fit_linear_rate(trace: IterationTrace, window=(10, 10_000),
                    f_star: float = 0.0) -> RateFit:
    """Contraction factor of the function gap: rho = exp(slope of
    log(f - f*) vs k)."""
    ks = trace.column("k")
    gaps = np.asarray(trace.column("f_val"), dtype=float) - f_star
    ks, gaps = _window_values(ks, gaps, window)
    slope, residual = _fit_line(ks, np.log(gaps))
    return RateFit(kind="linear", estimate=float(math.exp(slope)),
                   window=(int(ks[0]), int(ks[-1])), residual=residual)


def fit_power_rate(trace: IterationTrace, quantity: str,
                   window=(10, 10_000), f_star: float = 0.0,
                   iterate_norms: Optional[Sequence[float]] = None) -> RateFit:
    """Log-log slope of the chosen quantity against the iteration index.

    ``iterate_dist`` needs the per-iteration distances to the minimizer,
    supplied through ``iterate_norms`` (the trace stores norms, not points).
    """
    ks = np.asarray(trace.column("k"), dtype=float)
    if quantity == "f_gap":
        values = np.asarray(trace.column("f_val"), dtype=float) - f_star
    elif quantity == "grad_norm":
        values = np.asarray(trace.column("grad_norm"), dtype=float)
    elif quantity == "iterate_dist":
        if iterate_norms is None:
            raise ValueError("iterate_dist requires iterate_norms")
        values = np.asarray(iterate_norms, dtype=float)
        if values.shape[0] != ks.shape[0]:
            raise ValueError("iterate_norms length must match the trace")
    else:
        raise ValueError(f"unknown quantity {quantity!r}")
    ks, values = _window_values(ks, values, window)
    slope, residual = _fit_line(np.log(ks), np.log(values))
    return RateFit(kind="power", estimate=slope,
                   window=(int(ks[0]), int(ks[-1])), residual=residual)


def run_kl_experiment(p: float, dim: int = 2, seed: int = 0, mu: float = 3.0,
                      max_outer: int = 20_000, eps1: float = 1.0,
                      theta: float = 0.8, radius: float = 1.0,
                      x_scale: float = 0.9):
    """One IGD run on the power-of-norm function with a noisy oracle.

    The start point is a seeded direction at ``x_scale * radius`` from the
    origin.  Returns ``(fn, trace, iterate_norms)`` where ``iterate_norms``
    holds ||x^k|| for every recorded iteration (the minimizer is 0).
    """
    fn, problem = make_kl_function(p, dim, radius)
    rng = np.random.default_rng(seed)
    direction = rng.standard_normal(dim)
    direction /= np.linalg.norm(direction)
    x1 = x_scale * radius * direction
    oracle = NoisyOracle(problem, np.random.default_rng(seed + 1))
    cfg = IgdConfig(lipschitz_L=problem.lipschitz_L, eps1=eps1, theta=theta,
                    mu=mu, max_outer=max_outer)
    norms = []

    def record(k, x, g, eps, x_next):
        norms.append(float(np.linalg.norm(x)))
        return None

    _, trace, _ = igd_solve(problem, oracle, cfg, x1=x1, callback=record)
    return fn, trace, norms


def rate_report_rows(p_values: Sequence[float] = (2.0, 4.0),
                     dim: int = 2, seed: int = 0, mu: float = 3.0,
                     max_outer: int = 20_000,
                     window=(100, 10_000)):
    """Run the default suite and produce rate-report rows (list of dicts)."""
    rows = []
    for p in p_values:
        fn, trace, norms = run_kl_experiment(p, dim=dim, seed=seed, mu=mu,
                                             max_outer=max_outer)
        if fn.q <= 0.5:
            fit = fit_linear_rate(trace, window=window)
            rows.append({"function_p": p, "q": fn.q, "quantity": "f_gap",
                         "predicted_exp": "linear",
                         "fitted_exp": fit.estimate,
                         "residual": fit.residual})
            continue
        for quantity in QUANTITIES:
            fit = fit_power_rate(trace, quantity, window=window,
                                 iterate_norms=norms)
            rows.append({"function_p": p, "q": fn.q, "quantity": quantity,
                         "predicted_exp": predicted_exponent(fn.q, quantity),
                         "fitted_exp": fit.estimate,
                         "residual": fit.residual})
    return rows


def write_rate_report(rows, path_or_file) -> None:
    lines = [",".join(RATE_REPORT_COLUMNS)]
    for row in rows:
        lines.append(",".join(str(row[col]) for col in RATE_REPORT_COLUMNS))
    text = "\n".join(lines) + "\n"
    if hasattr(path_or_file, "write"):
        path_or_file.write(text)
    else:
        with open(path_or_file, "w") as fh:
            fh.write(text)
