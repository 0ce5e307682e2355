"""Inexact gradient descent with adaptive error control."""

from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, field
from typing import Callable, Optional, Union

import numpy as np

from .core import SmoothProblem
from .oracles import OracleError
from .trace import IterationRecord, IterationTrace

logger = logging.getLogger(__name__)


@dataclass
class IgdConfig:
    """Parameters of the adaptive inexact gradient loop.

    ``mu > 2`` is what the convergence theory asks for; smaller values
    (down to > 1) are accepted with a logged warning because the mu = 1.1
    preset is part of the benchmark protocol.
    """

    lipschitz_L: float
    eps1: float = 1.0
    theta: float = 0.8
    mu: float = 3.0
    i_max: int = 60
    max_outer: int = 10_000
    eps_tol: float = 0.0
    grad_tol: float = 0.0
    time_budget: float = math.inf

    def __post_init__(self):
        if not (0.0 < self.theta < 1.0):
            raise ValueError("theta must lie in (0, 1)")
        if self.mu <= 1.0:
            raise ValueError("mu must exceed 1")
        if self.mu <= 2.0:
            logger.warning("mu=%g <= 2: outside the convergence theory; "
                           "descent is no longer guaranteed", self.mu)
        if self.eps1 <= 0 or self.lipschitz_L <= 0:
            raise ValueError("eps1 and lipschitz_L must be positive")
        if self.i_max < 1 or self.max_outer < 1:
            raise ValueError("i_max and max_outer must be positive")


@dataclass
class Converged:
    reason: str  # "eps_tol" | "grad_tol"


@dataclass
class StationaryCertificate:
    """The inner search capped out: ||grad f(x)|| <= bound at this iterate."""
    bound: float


@dataclass
class BudgetExhausted:
    kind: str  # "outer" | "time"
    final_norm: float = math.nan


@dataclass
class OracleFailure:
    message: str


SolveStatus = Union[Converged, StationaryCertificate, BudgetExhausted,
                    OracleFailure]


def ik_upper_bound(grad_norm: float, eps_k: float, theta: float,
                   mu: float) -> int:
    """Bound on the accepted inner index when the true gradient norm is known.

    0 when eps_k < grad_norm / (mu + 1); otherwise
    ceil(log_theta(grad_norm / (eps_k (mu + 1))) + 1).
    """
    if grad_norm <= 0:
        raise ValueError("grad_norm must be positive")
    if eps_k < grad_norm / (mu + 1.0):
        return 0
    ratio = grad_norm / (eps_k * (mu + 1.0))
    return int(math.ceil(math.log(ratio) / math.log(theta) + 1.0))


def igd_inner_search(oracle, x: np.ndarray, eps_k: float, cfg: IgdConfig):
    """Find the smallest i with an oracle answer g at error level theta^i eps_k
    whose norm exceeds mu theta^i eps_k.

    Returns ``(g, i)`` on acceptance or a :class:`StationaryCertificate`:
    rejection at level i means some g with error <= theta^i eps_k had norm
    <= mu theta^i eps_k, hence ||grad f(x)|| <= (mu + 1) theta^i eps_k.
    """
    if eps_k <= 0:
        raise ValueError("eps_k must be positive")
    level = eps_k
    for i in range(cfg.i_max + 1):
        g = oracle.query(x, level)
        # Strict inequality: equality rejects.
        if np.linalg.norm(g) > cfg.mu * level:
            return g, i
        level *= cfg.theta
    return StationaryCertificate(bound=(cfg.mu + 1.0) * cfg.theta ** cfg.i_max
                                 * eps_k)


def igd_step(x: np.ndarray, g: np.ndarray, L: float) -> np.ndarray:
    """The fixed-stepsize update x - g / L."""
    return x - g / L


def igd_solve(problem: SmoothProblem, oracle, cfg: IgdConfig,
              x1: Optional[np.ndarray] = None,
              callback: Optional[Callable] = None):
    """Run the full adaptive loop.

    ``problem.value`` may be None when exact objective values are not
    available (envelope smoothing); the oracle's ``value_estimate`` is
    recorded instead.  ``callback(k, x, g, eps, x_next)`` is invoked after
    each accepted step; returning a nonempty string stops the run with
    ``Converged(reason)``.

    Returns ``(x_final, trace, status)``.
    """
    x = np.zeros(problem.dim) if x1 is None else np.asarray(x1, dtype=float).copy()
    trace = IterationTrace(metadata={
        "mu": cfg.mu, "theta": cfg.theta, "eps1": cfg.eps1,
        "L": cfg.lipschitz_L})
    eps = cfg.eps1
    t0 = time.perf_counter()
    status: SolveStatus
    k = 0
    while True:
        if k >= cfg.max_outer:
            status = BudgetExhausted("outer", final_norm=float(np.linalg.norm(x)))
            break
        if time.perf_counter() - t0 > cfg.time_budget:
            status = BudgetExhausted("time", final_norm=float(np.linalg.norm(x)))
            break
        k += 1
        cost_before = getattr(oracle, "cost", 0)
        try:
            found = igd_inner_search(oracle, x, eps, cfg)
        except OracleError as exc:
            status = OracleFailure(str(exc))
            k -= 1
            break
        if isinstance(found, StationaryCertificate):
            status = found
            k -= 1
            break
        g, i_k = found
        if problem.value is not None:
            f_val = float(problem.value(x))
        elif hasattr(oracle, "value_estimate"):
            f_val = float(oracle.value_estimate())
        else:
            f_val = math.nan
        if not math.isfinite(f_val) and problem.value is not None:
            status = OracleFailure("non-finite objective value")
            break
        gnorm = float(np.linalg.norm(g))
        trace.append(IterationRecord(
            k=k, f_val=f_val, grad_norm_or_residual=gnorm, eps_k=eps,
            i_k=i_k, inner_iters=getattr(oracle, "cost", 0) - cost_before,
            elapsed=time.perf_counter() - t0))
        x_next = igd_step(x, g, cfg.lipschitz_L)
        if callback is not None:
            reason = callback(k, x, g, eps, x_next)
            if reason:
                x = x_next
                eps = cfg.theta ** i_k * eps
                status = Converged(str(reason))
                break
        x = x_next
        eps = cfg.theta ** i_k * eps
        if eps <= cfg.eps_tol:
            status = Converged("eps_tol")
            break
        if gnorm <= cfg.grad_tol:
            status = Converged("grad_tol")
            break
    trace.metadata["final_norm"] = float(np.linalg.norm(x))
    return x, trace, status
