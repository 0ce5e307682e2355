"""Inexact-gradient oracles: answers to "give g with ||g - grad f(x)|| <= eps"."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .core import SmoothProblem, as_vector


class OracleError(RuntimeError):
    """The oracle could not certify the requested accuracy.

    ``best_point`` / ``achieved`` carry the best-effort answer when the inner
    budget ran out before the certificate was reached.
    """

    def __init__(self, message: str, best_point=None, achieved: float = math.inf):
        super().__init__(message)
        self.best_point = best_point
        self.achieved = achieved


def ffd_gradient(f_value: Callable[[np.ndarray], float], x, eps: float,
                 L: float) -> np.ndarray:
    """Forward finite differences with the step chosen from the error target.

    The step is half the admissible maximum, ``delta = eps / (L sqrt(n))``,
    which bounds the error by ``eps / 2``.  Consumes n + 1 evaluations.
    """
    if eps <= 0 or L <= 0:
        raise ValueError("eps and L must be positive")
    x = as_vector(x)
    n = x.shape[0]
    delta = eps / (L * math.sqrt(n))
    f0 = f_value(x)
    g = np.empty(n)
    for i in range(n):
        xp = x.copy()
        xp[i] += delta
        g[i] = (f_value(xp) - f0) / delta
    if not np.all(np.isfinite(g)) or not math.isfinite(f0):
        raise OracleError("non-finite function value in finite differences")
    return g


def cfd_gradient(f_value: Callable[[np.ndarray], float], x, eps: float,
                 M: float) -> np.ndarray:
    """Centered finite differences; needs an M-Lipschitz Hessian.

    ``delta**2`` is half the admissible maximum ``24 eps / (M sqrt(n))``, so
    the error is at most ``eps / 2``.  Consumes 2n evaluations.
    """
    if eps <= 0 or M <= 0:
        raise ValueError("eps and M must be positive")
    x = as_vector(x)
    n = x.shape[0]
    delta = math.sqrt(12.0 * eps / (M * math.sqrt(n)))
    g = np.empty(n)
    for i in range(n):
        xp = x.copy()
        xm = x.copy()
        xp[i] += delta / 2.0
        xm[i] -= delta / 2.0
        g[i] = (f_value(xp) - f_value(xm)) / delta
    if not np.all(np.isfinite(g)):
        raise OracleError("non-finite function value in finite differences")
    return g


class FfdOracle:
    """Gradient oracle backed by forward finite differences."""

    def __init__(self, f_value: Callable[[np.ndarray], float], L: float):
        self.f_value = f_value
        self.L = L
        self.cost = 0

    def query(self, x: np.ndarray, eps: float) -> np.ndarray:
        self.cost += x.shape[0] + 1
        return ffd_gradient(self.f_value, x, eps, self.L)


class CfdOracle:
    """Gradient oracle backed by centered finite differences."""

    def __init__(self, f_value: Callable[[np.ndarray], float], M: float):
        self.f_value = f_value
        self.M = M
        self.cost = 0

    def query(self, x: np.ndarray, eps: float) -> np.ndarray:
        self.cost += 2 * x.shape[0]
        return cfd_gradient(self.f_value, x, eps, self.M)


class ExactOracle:
    """Returns the exact gradient; an error-0 test double."""

    def __init__(self, problem: SmoothProblem):
        self.problem = problem
        self.cost = 0

    def query(self, x: np.ndarray, eps: float) -> np.ndarray:
        self.cost += 1
        return self.problem.grad(x)


class NoisyOracle:
    """Exact gradient plus a random perturbation of norm at most eps.

    The perturbation is a uniformly random direction scaled by a uniform
    radius in [0, eps], so the hard error bound holds by construction.
    Deterministic for a fixed seed and call sequence.
    """

    def __init__(self, problem: SmoothProblem, rng: np.random.Generator):
        self.problem = problem
        self.rng = rng
        self.cost = 0

    def query(self, x: np.ndarray, eps: float) -> np.ndarray:
        if eps < 0:
            raise ValueError("eps must be nonnegative")
        self.cost += 1
        g = self.problem.grad(x)
        u = self.rng.standard_normal(x.shape[0])
        norm = np.linalg.norm(u)
        if norm == 0.0:  # pragma: no cover - measure-zero draw
            return g
        radius = self.rng.uniform(0.0, eps)
        return g + (radius / norm) * u


@dataclass
class ProxSubproblem:
    """The strongly convex inner problem behind a Moreau-envelope gradient.

    phi(y) = smooth(y) + nonsmooth(y) + ||y - anchor||^2 / (2 lam) is
    (1/lam)-strongly convex.  ``nonsmooth_prox(u, t)`` evaluates the proximal
    mapping of t * nonsmooth at u; omit both nonsmooth pieces for smooth g.
    """

    lam: float
    anchor: np.ndarray
    smooth_value: Callable[[np.ndarray], float] = lambda y: 0.0
    smooth_grad: Optional[Callable[[np.ndarray], np.ndarray]] = None
    smooth_lipschitz: float = 0.0
    nonsmooth_value: Optional[Callable[[np.ndarray], float]] = None
    nonsmooth_prox: Optional[Callable[[np.ndarray, float], np.ndarray]] = None

    def phi_value(self, y: np.ndarray) -> float:
        v = self.smooth_value(y)
        if self.nonsmooth_value is not None:
            v += self.nonsmooth_value(y)
        return v + float(np.sum((y - self.anchor) ** 2)) / (2.0 * self.lam)

    def _phi_smooth_grad(self, y: np.ndarray) -> np.ndarray:
        g = (y - self.anchor) / self.lam
        if self.smooth_grad is not None:
            g = g + self.smooth_grad(y)
        return g


def minimize_prox_subproblem(sub: ProxSubproblem, tol: float,
                             warm_start: Optional[np.ndarray] = None,
                             max_iters: int = 100_000):
    """Drive phi's certified subgradient residual below ``tol``.

    Proximal-gradient descent on phi (plain gradient descent when there is no
    nonsmooth part).  After a step y -> y+, the vector
    ``v = G_t(y) - grad s(y) + grad s(y+)`` lies in the subdifferential of
    phi at y+, so by (1/lam)-strong convexity
    ``||y+ - argmin phi|| <= lam ||v||``.  Stopping at ``||v|| <= tol``
    therefore certifies ``||y+ - Prox|| <= lam * tol``.

    Returns ``(y, certified_residual, iters)``.  Raises :class:`OracleError`
    with the best-effort point when the budget runs out.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    lam = sub.lam
    step = 1.0 / (sub.smooth_lipschitz + 1.0 / lam)
    y = sub.anchor.copy() if warm_start is None else np.asarray(
        warm_start, dtype=float).copy()
    best = math.inf
    for it in range(max_iters + 1):
        gs = sub._phi_smooth_grad(y)
        forward = y - step * gs
        if sub.nonsmooth_prox is not None:
            y_next = sub.nonsmooth_prox(forward, step)
        else:
            y_next = forward
        mapping = (y - y_next) / step
        gs_next = sub._phi_smooth_grad(y_next)
        v = mapping - gs + gs_next
        residual = float(np.linalg.norm(v))
        if not math.isfinite(residual):
            raise OracleError("non-finite inner iterate", best_point=y)
        if residual <= tol:
            return y_next, residual, it
        best = min(best, residual)
        y = y_next
    raise OracleError(
        f"inner budget exhausted (best residual {best:.3e} > tol {tol:.3e})",
        best_point=y, achieved=best)


def moreau_gradient_oracle(sub: ProxSubproblem, eps: float,
                           warm_start: Optional[np.ndarray] = None,
                           max_iters: int = 100_000):
    """Approximate gradient of the Moreau envelope e_lam g at the anchor.

    Finds y with certified ||y - Prox_{lam g}(anchor)|| <= lam * eps and
    returns ``G = (anchor - y) / lam``, so ||G - grad e_lam g(anchor)|| <= eps.

    Returns ``(G, y, inner_iters)``.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    y, _, iters = minimize_prox_subproblem(sub, eps, warm_start, max_iters)
    g = (sub.anchor - y) / sub.lam
    return g, y, iters


class MoreauOracle:
    """Gradient oracle for f = e_lam g built from inner prox solves.

    Warm-starts each query from the previous inner solution.  Exposes
    ``last_point`` (the certified inner point) and ``value_estimate`` (phi at
    that point, an upper bound on the envelope within the certified gap).
    """

    def __init__(self, make_subproblem: Callable[[np.ndarray], ProxSubproblem],
                 max_inner: int = 100_000):
        self.make_subproblem = make_subproblem
        self.max_inner = max_inner
        self.cost = 0
        self.last_point: Optional[np.ndarray] = None
        self._last_sub: Optional[ProxSubproblem] = None

    def query(self, x: np.ndarray, eps: float) -> np.ndarray:
        sub = self.make_subproblem(x)
        g, y, iters = moreau_gradient_oracle(sub, eps, self.last_point,
                                             self.max_inner)
        self.cost += iters
        self.last_point = y
        self._last_sub = sub
        return g

    def value_estimate(self) -> float:
        if self._last_sub is None or self.last_point is None:
            return math.nan
        return self._last_sub.phi_value(self.last_point)
