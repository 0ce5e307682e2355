"""Inexact proximal point methods on the Moreau envelope.

GIPPM is realized by running the adaptive inexact gradient loop on
f = e_lam g with the gradient oracle g = (x - p) / lam, where p is a
certified inexact proximal point.  The classical absolute (A) and relative
(B) error schemes are provided as baselines with identical instrumentation.
"""

from __future__ import annotations

import math
import re
import time
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .core import SmoothProblem
from .igd import (BudgetExhausted, Converged, IgdConfig, OracleFailure,
                  StationaryCertificate, igd_solve)
from .oracles import OracleError, ProxSubproblem, minimize_prox_subproblem
from .trace import IterationRecord, IterationTrace


@dataclass
class ConvexProblem:
    """A proper l.s.c. convex objective g, split for the inner solver.

    g = smooth + nonsmooth.  ``nonsmooth_prox(u, t)`` is the proximal mapping
    of t * nonsmooth.  ``prox_exact(lam, x)`` short-circuits the inner solver
    when a closed form is known.
    """

    dim: int
    value: Optional[Callable[[np.ndarray], float]] = None
    smooth_value: Callable[[np.ndarray], float] = lambda y: 0.0
    smooth_grad: Optional[Callable[[np.ndarray], np.ndarray]] = None
    smooth_lipschitz: float = 0.0
    nonsmooth_value: Optional[Callable[[np.ndarray], float]] = None
    nonsmooth_prox: Optional[Callable[[np.ndarray, float], np.ndarray]] = None
    prox_exact: Optional[Callable[[float, np.ndarray], np.ndarray]] = None
    name: str = ""

    def g_value(self, y: np.ndarray) -> float:
        if self.value is not None:
            return float(self.value(y))
        v = float(self.smooth_value(y))
        if self.nonsmooth_value is not None:
            v += float(self.nonsmooth_value(y))
        return v

    def value_known(self) -> bool:
        return (self.value is not None or self.smooth_grad is not None
                or self.nonsmooth_value is not None)

    def subproblem(self, lam: float, anchor: np.ndarray) -> ProxSubproblem:
        return ProxSubproblem(
            lam=lam, anchor=anchor, smooth_value=self.smooth_value,
            smooth_grad=self.smooth_grad,
            smooth_lipschitz=self.smooth_lipschitz,
            nonsmooth_value=self.nonsmooth_value,
            nonsmooth_prox=self.nonsmooth_prox)


class SubproblemProxOracle:
    """Answers "give p with ||p - Prox_{lam g}(x)|| <= lam * eps".

    Uses the closed-form prox when the problem has one, otherwise the
    certified inner solver, warm-started from the previous answer.
    """

    def __init__(self, problem: ConvexProblem, lam: float,
                 max_inner: int = 100_000):
        if lam <= 0:
            raise ValueError("lam must be positive")
        self.problem = problem
        self.lam = lam
        self.max_inner = max_inner
        self.cost = 0
        self.last_point: Optional[np.ndarray] = None
        self.last_certificate = math.inf

    def query(self, x: np.ndarray, eps: float) -> np.ndarray:
        if self.problem.prox_exact is not None:
            p = self.problem.prox_exact(self.lam, x)
            self.last_certificate = 0.0
        else:
            sub = self.problem.subproblem(self.lam, x)
            p, residual, iters = minimize_prox_subproblem(
                sub, eps, self.last_point, self.max_inner)
            self.cost += iters
            self.last_certificate = self.lam * residual
        self.last_point = p
        return p


def inexact_prox(oracle, x: np.ndarray, eps_level: float) -> np.ndarray:
    """A proximal point certified to within lam * eps_level of the exact one."""
    if eps_level <= 0:
        raise ValueError("eps_level must be positive")
    return oracle.query(x, eps_level)


@dataclass
class GippmConfig(IgdConfig):
    """IGD configuration specialized to the envelope: L is pinned to 1/lam."""

    lam: float = 1.0

    def __init__(self, lam: float, **kwargs):
        if lam <= 0:
            raise ValueError("lam must be positive")
        kwargs.pop("lipschitz_L", None)
        self.lam = lam
        super().__init__(lipschitz_L=1.0 / lam, **kwargs)


class EnvelopeGradientOracle:
    """Gradient oracle for f = e_lam g built on an inexact prox oracle."""

    def __init__(self, prox_oracle, lam: float,
                 g_value: Optional[Callable[[np.ndarray], float]] = None):
        self.prox_oracle = prox_oracle
        self.lam = lam
        self.g_value = g_value
        self.last_x: Optional[np.ndarray] = None
        self.last_p: Optional[np.ndarray] = None

    @property
    def cost(self) -> int:
        return getattr(self.prox_oracle, "cost", 0)

    def query(self, x: np.ndarray, eps: float) -> np.ndarray:
        p = self.prox_oracle.query(x, eps)
        self.last_x = x
        self.last_p = p
        return (x - p) / self.lam

    def value_estimate(self) -> float:
        # phi_lam at the certified inner point: an upper bound on the
        # envelope at last_x within the certified gap.
        if self.last_p is None or self.g_value is None:
            return math.nan
        gap = float(np.sum((self.last_p - self.last_x) ** 2)) / (2.0 * self.lam)
        return self.g_value(self.last_p) + gap


def gippm_solve(problem: ConvexProblem, cfg: GippmConfig,
                x1: Optional[np.ndarray] = None,
                prox_oracle=None, callback=None):
    """Adaptive inexact proximal point method for min g.

    Returns ``(x_final, trace, status)``.  The trace's f column holds the
    phi-value surrogate for the envelope (flagged approximate in metadata).
    """
    if prox_oracle is None:
        prox_oracle = SubproblemProxOracle(problem, cfg.lam)
    grad_oracle = EnvelopeGradientOracle(
        prox_oracle, cfg.lam,
        g_value=problem.g_value if problem.value_known() else None)
    envelope = SmoothProblem(dim=problem.dim, value=None, grad=None,
                             lipschitz_L=cfg.lipschitz_L,
                             name=f"e_lam[{problem.name}]")
    x, trace, status = igd_solve(envelope, grad_oracle, cfg, x1=x1,
                                 callback=callback)
    trace.method = "GIPPM"
    trace.metadata.update({"method": "GIPPM", "lam": cfg.lam,
                           "f_val_semantics": "phi_at_certified_point"})
    return x, trace, status


def ippm_baseline_solve(problem: ConvexProblem, lam: float, scheme: str,
                        c: float = 1.0, p_exp: float = 1.5,
                        max_outer: int = 1000, grad_tol: float = 0.0,
                        time_budget: float = math.inf,
                        x1: Optional[np.ndarray] = None,
                        prox_oracle=None, max_rel_retries: int = 60,
                        callback=None):
    """Classical inexact proximal point baselines.

    Scheme "A": absolute per-step prox error delta_k = c * k**(-p_exp).
    Scheme "B": relative test ||p - Prox|| <= delta_k ||x - p||, enforced
    through the certified residual; p = x is accepted only with an exact
    certificate.  ``p_exp > 1`` keeps the error sequence summable.
    """
    if scheme not in ("A", "B"):
        raise ValueError("scheme must be 'A' or 'B'")
    if p_exp <= 1.0:
        raise ValueError("p_exp must exceed 1 for a summable error sequence")
    if c <= 0:
        raise ValueError("c must be positive")
    if prox_oracle is None:
        prox_oracle = SubproblemProxOracle(problem, lam)
    x = np.zeros(problem.dim) if x1 is None else np.asarray(x1, dtype=float).copy()
    trace = IterationTrace(method=f"IPPM-{scheme}", metadata={
        "method": f"IPPM-{scheme}", "lam": lam, "c": c, "p_exp": p_exp,
        "f_val_semantics": "phi_at_certified_point"})
    t0 = time.perf_counter()
    status = BudgetExhausted("outer")
    for k in range(1, max_outer + 1):
        if time.perf_counter() - t0 > time_budget:
            status = BudgetExhausted("time", float(np.linalg.norm(x)))
            break
        delta_k = c * float(k) ** (-p_exp)
        cost_before = getattr(prox_oracle, "cost", 0)
        retries = 0
        try:
            if scheme == "A":
                p = prox_oracle.query(x, delta_k / lam)
            else:
                level = delta_k * max(float(np.linalg.norm(x)), 1.0) / lam
                while True:
                    p = prox_oracle.query(x, level)
                    step_norm = float(np.linalg.norm(x - p))
                    if prox_oracle.last_certificate <= delta_k * step_norm:
                        break
                    if retries >= max_rel_retries:
                        raise OracleError(
                            "relative prox test not reached within retries")
                    retries += 1
                    level = max(delta_k * step_norm, lam * level * 0.25) / lam \
                        if step_norm > 0 else level * 0.25
        except OracleError as exc:
            status = OracleFailure(str(exc))
            break
        res_norm = float(np.linalg.norm(x - p)) / lam
        gap = float(np.sum((p - x) ** 2)) / (2.0 * lam)
        trace.append(IterationRecord(
            k=k, f_val=problem.g_value(p) + gap, grad_norm_or_residual=res_norm,
            eps_k=delta_k, i_k=retries,
            inner_iters=getattr(prox_oracle, "cost", 0) - cost_before,
            elapsed=time.perf_counter() - t0))
        if callback is not None:
            callback(k, x, p, delta_k)
        x = p
        if res_norm <= grad_tol:
            status = Converged("grad_tol")
            break
    trace.metadata["final_norm"] = float(np.linalg.norm(x))
    return x, trace, status


_PRESET_RE = re.compile(
    r"^(GIPPM-(?P<mu>[0-9.]+)|IPPM-(?P<scheme>[AB])\((?P<c>[0-9.]+),(?P<p>[0-9.]+)\))$")


def run_preset(name: str, problem: ConvexProblem, lam: float,
               max_outer: int = 1000, grad_tol: float = 0.0,
               eps1: float = 1.0, theta: float = 0.8,
               x1: Optional[np.ndarray] = None, **kwargs):
    """Run a named scheme: GIPPM-<mu>, IPPM-A(c,p), or IPPM-B(c,p)."""
    m = _PRESET_RE.match(name)
    if m is None:
        raise ValueError(f"unknown preset {name!r}")
    if m.group("mu") is not None:
        cfg = GippmConfig(lam=lam, mu=float(m.group("mu")), eps1=eps1,
                          theta=theta, max_outer=max_outer,
                          grad_tol=grad_tol, **kwargs)
        return gippm_solve(problem, cfg, x1=x1)
    return ippm_baseline_solve(problem, lam, m.group("scheme"),
                               c=float(m.group("c")), p_exp=float(m.group("p")),
                               max_outer=max_outer, grad_tol=grad_tol,
                               x1=x1, **kwargs)
