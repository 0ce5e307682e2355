"""Shared fixtures: a zoo of smooth test problems with exact gradients and
valid Lipschitz constants, plus oracle factories."""

from __future__ import annotations

import numpy as np
import pytest

from igdopt import SmoothProblem
from igdopt.oracles import ExactOracle, FfdOracle, NoisyOracle


def _quad(d: np.ndarray, name: str) -> SmoothProblem:
    d = np.asarray(d, dtype=float)
    return SmoothProblem(
        dim=d.shape[0],
        value=lambda x: 0.5 * float(x @ (d * x)),
        grad=lambda x: d * np.asarray(x, dtype=float),
        lipschitz_L=float(d.max()), name=name)


def _norm_power(p: float, dim: int, radius: float) -> SmoothProblem:
    return SmoothProblem(
        dim=dim,
        value=lambda x: float(np.linalg.norm(x) ** p) / p,
        grad=lambda x: (np.linalg.norm(x) ** (p - 2.0)) * np.asarray(x, float)
        if np.linalg.norm(x) > 0 else np.zeros(dim),
        lipschitz_L=(p - 1.0) * radius ** (p - 2.0),
        name=f"norm-power-{p:g}")


def _least_squares(seed: int, m: int, n: int) -> SmoothProblem:
    rng = np.random.default_rng(seed)
    a = rng.standard_normal((m, n))
    b = rng.standard_normal(m)
    L = float(np.linalg.norm(a, 2) ** 2)
    return SmoothProblem(
        dim=n,
        value=lambda x: 0.5 * float(np.sum((a @ x - b) ** 2)),
        grad=lambda x: a.T @ (a @ x - b),
        lipschitz_L=L, name="least-squares")


def make_zoo() -> list[SmoothProblem]:
    """At least 10 C^{1,1} problems with exact gradients for auditing."""
    zoo = [
        _quad(np.ones(3), "sphere"),
        _quad(np.array([1.0, 4.0]), "aniso-quad"),
        _quad(np.arange(1.0, 6.0), "diag-quad"),
        _norm_power(3.0, 2, 2.0),
        _norm_power(4.0, 2, 2.0),
        _least_squares(7, 6, 4),
        SmoothProblem(  # log-sum-exp: convex, L = 1
            dim=3,
            value=lambda x: float(np.logaddexp.reduce(x)),
            grad=lambda x: np.exp(x - np.logaddexp.reduce(x)),
            lipschitz_L=1.0, name="log-sum-exp"),
        SmoothProblem(  # pseudo-Huber: L = 1
            dim=4,
            value=lambda x: float(np.sqrt(1.0 + x @ x) - 1.0),
            grad=lambda x: np.asarray(x, float) / np.sqrt(1.0 + x @ x),
            lipschitz_L=1.0, name="pseudo-huber"),
        SmoothProblem(  # smooth nonconvex perturbation of a quadratic
            dim=2,
            value=lambda x: 0.5 * float(x @ x) + 0.1 * float(np.cos(x.sum())),
            grad=lambda x: np.asarray(x, float) - 0.1 * np.sin(x.sum()),
            lipschitz_L=1.0 + 0.1 * 2,
            name="quad-plus-cosine"),
        SmoothProblem(  # coordinate-wise Huber, L = 1
            dim=3,
            value=lambda x: float(np.sum(np.where(
                np.abs(x) <= 1.0, 0.5 * x ** 2, np.abs(x) - 0.5))),
            grad=lambda x: np.clip(np.asarray(x, float), -1.0, 1.0),
            lipschitz_L=1.0, name="huber"),
    ]
    assert len(zoo) >= 10
    return zoo


@pytest.fixture(scope="session")
def zoo():
    return make_zoo()


def make_oracle(kind: str, problem: SmoothProblem, seed: int):
    if kind == "exact":
        return ExactOracle(problem)
    if kind == "noisy":
        return NoisyOracle(problem, np.random.default_rng(seed))
    if kind == "ffd":
        return FfdOracle(problem.value, problem.lipschitz_L)
    raise ValueError(kind)


ORACLE_KINDS = ("exact", "noisy", "ffd")


def start_point(problem: SmoothProblem, seed: int, scale: float = 0.5):
    """A seeded start point; kept small so power-norm problems stay in the
    region where their Lipschitz constant is valid."""
    rng = np.random.default_rng(1000 + seed)
    x = rng.standard_normal(problem.dim)
    return scale * x / np.linalg.norm(x) * np.sqrt(problem.dim)
