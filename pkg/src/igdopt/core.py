"""Shared dense linear algebra, linear operators, and smooth-problem types."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np


class DimensionError(ValueError):
    """Shapes of the operands do not match; indicates a caller bug."""


class NonFiniteError(ValueError):
    """A NaN or infinity showed up where a finite number was required."""


def as_vector(x, n: Optional[int] = None) -> np.ndarray:
    """Validate and return a finite 1-d float array."""
    v = np.asarray(x, dtype=float)
    if v.ndim != 1:
        raise DimensionError(f"expected a vector, got shape {v.shape}")
    if n is not None and v.shape[0] != n:
        raise DimensionError(f"expected length {n}, got {v.shape[0]}")
    if not np.all(np.isfinite(v)):
        raise NonFiniteError("vector has non-finite entries")
    return v


def as_matrix(a) -> np.ndarray:
    """Validate and return a finite 2-d float array (row-major semantics)."""
    m = np.asarray(a, dtype=float)
    if m.ndim != 2:
        raise DimensionError(f"expected a matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise NonFiniteError("matrix has non-finite entries")
    return m


def matvec(a, x) -> np.ndarray:
    """Dense matrix-vector product with a fixed summation order.

    Deterministic: two calls with identical inputs give bit-identical output.
    """
    m = as_matrix(a)
    v = as_vector(x, m.shape[1])
    return m @ v


class LinearOperator:
    """Matrix-free linear map with an explicit adjoint.

    Structured operators (e.g. the blur operator) implement ``apply`` and
    ``apply_adjoint`` without materializing a dense matrix.
    """

    def __init__(self, shape: tuple[int, int],
                 apply: Callable[[np.ndarray], np.ndarray],
                 apply_adjoint: Callable[[np.ndarray], np.ndarray]):
        self.shape = (int(shape[0]), int(shape[1]))
        self._apply = apply
        self._apply_adjoint = apply_adjoint

    def apply(self, x: np.ndarray) -> np.ndarray:
        return self._apply(np.asarray(x, dtype=float))

    def apply_adjoint(self, y: np.ndarray) -> np.ndarray:
        return self._apply_adjoint(np.asarray(y, dtype=float))


class MatrixOperator(LinearOperator):
    """Dense matrix wrapped in the operator interface."""

    def __init__(self, a):
        self.matrix = as_matrix(a)
        super().__init__(self.matrix.shape,
                         lambda x: self.matrix @ x,
                         lambda y: self.matrix.T @ y)


def as_operator(a) -> LinearOperator:
    if isinstance(a, LinearOperator):
        return a
    return MatrixOperator(a)


#: Safety factor applied to the power-iteration estimate so the returned
#: value upper-bounds the true operator norm despite truncation.
OPNORM_SAFETY = 1.01


def operator_norm(a, iters: int = 200, tol: float = 1e-10,
                  seed: int = 0) -> float:
    """Estimate ``||A||`` (largest singular value) by power iteration on A^T A.

    The estimate is inflated by :data:`OPNORM_SAFETY` so it is an upper bound
    on the true norm up to the convergence tolerance.  Returns 0 for the zero
    operator.
    """
    op = as_operator(a)
    if iters < 1:
        raise ValueError("iters must be >= 1")
    m, n = op.shape
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(n)
    nv = np.linalg.norm(v)
    if nv == 0.0:  # pragma: no cover - measure-zero draw
        v = np.ones(n)
        nv = np.linalg.norm(v)
    v /= nv
    sigma = 0.0
    for _ in range(iters):
        w = op.apply_adjoint(op.apply(v))
        nw = np.linalg.norm(w)
        if nw == 0.0:
            return 0.0
        new_sigma = np.sqrt(nw)
        v = w / nw
        if abs(new_sigma - sigma) <= tol * max(new_sigma, 1.0):
            sigma = new_sigma
            break
        sigma = new_sigma
    return float(sigma * OPNORM_SAFETY)


@dataclass
class SmoothProblem:
    """A C^{1,1} objective: value, gradient, and a gradient Lipschitz bound.

    The descent lemma
    ``f(y) <= f(x) + <grad f(x), y-x> + (L/2)||y-x||^2``
    is expected to hold; tests verify it on sampled pairs.
    """

    dim: int
    value: Callable[[np.ndarray], float]
    grad: Callable[[np.ndarray], np.ndarray]
    lipschitz_L: float
    name: str = ""

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("dim must be positive")
        if self.lipschitz_L <= 0:
            raise ValueError("lipschitz_L must be positive")
