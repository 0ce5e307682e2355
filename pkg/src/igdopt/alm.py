"""Augmented Lagrangian methods for min h(x) subject to Ax = b.

The multiplier iteration of the adaptive method is a proximal point
iteration on the negated dual function, so the solver delegates to the
GIPPM machinery through an induced inexact prox oracle: solving the
augmented-Lagrangian subproblem to gap lam * eps^2 / 2 yields
p = y + lam (Ax - b) with ||p - Prox_{lam g}(y)|| <= lam * eps.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .core import LinearOperator, as_operator
from .igd import BudgetExhausted, Converged, OracleFailure
from .oracles import OracleError
from .prox import ConvexProblem, GippmConfig, gippm_solve
from .trace import IterationRecord, IterationTrace

SUMMARY_COLUMNS = ("method", "m", "n", "gamma", "lambda", "iters",
                   "total_inner_iters", "eta_final", "time_s")


@dataclass
class EqualityConstrainedProblem:
    """min h(x) s.t. Ax = b with a nonempty feasible set (caller asserts).

    ``dual_value`` is the closed-form dual function d(y) when one is known;
    it feeds the trace's objective surrogate and stays optional.
    """

    h_value: Callable[[np.ndarray], float]
    a: LinearOperator
    b: np.ndarray
    dual_value: Optional[Callable[[np.ndarray], float]] = None
    name: str = ""

    def __post_init__(self):
        self.a = as_operator(self.a)
        self.b = np.asarray(self.b, dtype=float)

    def residual(self, x: np.ndarray) -> np.ndarray:
        return self.a.apply(x) - self.b


def aug_lagrangian_value(prob: EqualityConstrainedProblem, lam: float,
                         x: np.ndarray, y: np.ndarray) -> float:
    """h(x) + <y, Ax-b> + (lam/2) ||Ax-b||^2."""
    h = float(prob.h_value(x))
    if not math.isfinite(h):
        raise ValueError("h(x) is not finite at the queried point")
    r = prob.residual(x)
    return h + float(y @ r) + 0.5 * lam * float(r @ r)


def dual_prox_gap_lower_bound(prob: EqualityConstrainedProblem, lam: float,
                              x: np.ndarray, y: np.ndarray,
                              prox_of_dual: np.ndarray) -> float:
    """(1/2 lam) ||y + lam (Ax-b) - Prox_{lam g}(y)||^2.

    A lower bound on the subproblem gap L(x, y) - inf L(., y); test-side
    instrumentation only.  ``prox_of_dual`` must come from an independent
    high-accuracy solve.
    """
    p = y + lam * prob.residual(x)
    return float(np.sum((p - prox_of_dual) ** 2)) / (2.0 * lam)


class AlmProxOracle:
    """Prox oracle for g = -d induced by an augmented-Lagrangian subproblem
    solver.

    ``solver.solve(y, gap_target, warm)`` must return ``(x, certified_gap,
    inner_iters)`` with L(x, y) - inf L(., y) <= certified_gap <= gap_target.
    Warm-starts each solve from the previous primal answer.
    """

    def __init__(self, prob: EqualityConstrainedProblem, solver, lam: float):
        self.prob = prob
        self.solver = solver
        self.lam = lam
        self.cost = 0
        self.last_primal: Optional[np.ndarray] = None
        self.last_residual: Optional[np.ndarray] = None
        self.last_certificate = math.inf

    def query(self, y: np.ndarray, eps: float) -> np.ndarray:
        gap_target = 0.5 * self.lam * eps * eps
        x, gap, iters = self.solver.solve(y, gap_target, self.last_primal)
        self.cost += iters
        self.last_primal = x
        r = self.prob.residual(x)
        self.last_residual = r
        self.last_certificate = self.lam * math.sqrt(
            max(2.0 * gap / self.lam, 0.0))
        return y + self.lam * r


def gialm_solve(prob: EqualityConstrainedProblem, solver, cfg: GippmConfig,
                y1: Optional[np.ndarray] = None, callback=None):
    """Adaptive inexact augmented Lagrangian method.

    Accepts a subproblem answer at level i when ||b - Ax|| > mu theta^i eps_k,
    then updates y <- y + lam (Ax - b) and eps <- theta^i eps.  A
    StationaryCertificate status means y is approximately dual optimal.

    ``callback(k, y, x_primal, resid_norm, y_next)`` may return a reason
    string to stop.  Returns ``(x_final, y_final, trace, status)``.
    """
    m = prob.b.shape[0]
    oracle = AlmProxOracle(prob, solver, cfg.lam)
    dual_g = None
    if prob.dual_value is not None:
        dv = prob.dual_value
        dual_g = lambda y: -float(dv(y))
    induced = ConvexProblem(dim=m, value=dual_g,
                            name=f"neg-dual[{prob.name}]")

    inner_cb = None
    if callback is not None:
        def inner_cb(k, y, g, eps, y_next):
            return callback(k, y, oracle.last_primal,
                            float(np.linalg.norm(oracle.last_residual)),
                            y_next)

    y, trace, status = gippm_solve(induced, cfg, x1=y1, prox_oracle=oracle,
                                   callback=inner_cb)
    trace.method = "GIALM"
    trace.metadata["method"] = "GIALM"
    x_final = oracle.last_primal
    return x_final, y, trace, status


def ialm_baseline_solve(prob: EqualityConstrainedProblem, solver, lam: float,
                        q: float = 2.0, max_outer: int = 1000,
                        res_tol: float = 0.0,
                        time_budget: float = math.inf,
                        y1: Optional[np.ndarray] = None, callback=None):
    """Classical inexact ALM with the summable schedule omega_k = k^{-q}.

    Per-iteration subproblem gap target delta_k^2 with delta_k =
    omega_k / sqrt(2); requires q > 1 for summability.
    """
    if q <= 1.0:
        raise ValueError("q must exceed 1 for a summable error sequence")
    y = np.zeros(prob.b.shape[0]) if y1 is None else np.asarray(
        y1, dtype=float).copy()
    trace = IterationTrace(method=f"IALM-{q:g}", metadata={
        "method": f"IALM-{q:g}", "lam": lam, "q": q})
    t0 = time.perf_counter()
    status = BudgetExhausted("outer")
    warm = None
    x = None
    for k in range(1, max_outer + 1):
        if time.perf_counter() - t0 > time_budget:
            status = BudgetExhausted("time", float(np.linalg.norm(y)))
            break
        omega_k = float(k) ** (-q)
        delta_k = omega_k / math.sqrt(2.0)
        try:
            x, gap, iters = solver.solve(y, delta_k ** 2, warm)
        except OracleError as exc:
            status = OracleFailure(str(exc))
            break
        warm = x
        r = prob.residual(x)
        res_norm = float(np.linalg.norm(r))
        f_val = math.nan
        if prob.dual_value is not None:
            p = y + lam * r
            f_val = -float(prob.dual_value(p)) + \
                0.5 * lam * float(r @ r)
        y_next = y + lam * r
        trace.append(IterationRecord(
            k=k, f_val=f_val, grad_norm_or_residual=res_norm,
            eps_k=delta_k, i_k=0, inner_iters=iters,
            elapsed=time.perf_counter() - t0))
        if callback is not None:
            reason = callback(k, y, x, res_norm, y_next)
            if reason:
                y = y_next
                status = Converged(str(reason))
                break
        y = y_next
        if res_norm <= res_tol:
            status = Converged("res_tol")
            break
    trace.metadata["final_norm"] = float(np.linalg.norm(y))
    return x, y, trace, status


def format_summary_row(method: str, m: int, n: int, gamma: float, lam: float,
                       iters: int, total_inner: int, eta_final: float,
                       time_s: float, wall_times: bool = False) -> str:
    t = time_s if wall_times else 0.0
    return (f"{method},{m},{n},{gamma!r},{lam!r},{iters},{total_inner},"
            f"{eta_final!r},{t!r}")
