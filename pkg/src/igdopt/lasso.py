"""Lasso benchmark: dual reformulation, inner solver, instances, runners.

The primal problem  min 0.5 ||Ax - b||^2 + gamma ||x||_1  is attacked
through the equality-constrained program

    min 0.5 ||y||^2 + delta_{gamma-ball-inf}(z)   s.t.  -A^T y - z = -c,

whose multiplier is the primal variable x and whose augmented-Lagrangian
subproblem reduces to smooth strongly convex minimization of psi over y.
"""

from __future__ import annotations

import json
import math
import struct
import time
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import alm
from .core import LinearOperator, MatrixOperator, as_operator, operator_norm
from .oracles import OracleError
from .prox import GippmConfig
from .trace import IterationTrace

GRID_SUMMARY_COLUMNS = ("test_id", "method", "m", "n", "iter", "eta",
                        "total_inner", "time_s")

INSTANCE_MAGIC = b"IGDLASSO"
INSTANCE_VERSION = 1

#: Desk-scale cap for the synthetic deblurring instance.
MAX_BLUR_SIDE = 64


def soft_threshold(u: np.ndarray, tau: float) -> np.ndarray:
    """Componentwise shrink toward zero: the prox of tau * l1-norm."""
    if tau <= 0:
        raise ValueError("tau must be positive")
    u = np.asarray(u, dtype=float)
    return np.sign(u) * np.maximum(np.abs(u) - tau, 0.0)


def project_linf_ball(u: np.ndarray, gamma: float) -> np.ndarray:
    """Clamp each component to [-gamma, gamma]."""
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    return np.clip(np.asarray(u, dtype=float), -gamma, gamma)


@dataclass
class LassoInstance:
    """(A, b, gamma) with the derived c = A^T b and an operator-norm bound."""

    op: LinearOperator
    b: np.ndarray
    gamma: float
    lam: float = 0.01
    seed: Optional[int] = None
    params: dict = field(default_factory=dict)
    c: np.ndarray = None
    op_norm: float = 0.0

    def __post_init__(self):
        self.op = as_operator(self.op)
        self.b = np.asarray(self.b, dtype=float)
        if self.gamma <= 0 or self.lam <= 0:
            raise ValueError("gamma and lam must be positive")
        if self.c is None:
            self.c = self.op.apply_adjoint(self.b)
        if self.op_norm == 0.0:
            self.op_norm = operator_norm(self.op)

    @property
    def m(self) -> int:
        return self.op.shape[0]

    @property
    def n(self) -> int:
        return self.op.shape[1]

    @property
    def matrix(self) -> np.ndarray:
        if not isinstance(self.op, MatrixOperator):
            raise TypeError("instance is matrix-free")
        return self.op.matrix

    def primal_value(self, x: np.ndarray) -> float:
        r = self.op.apply(x) - self.b
        return 0.5 * float(r @ r) + self.gamma * float(np.sum(np.abs(x)))

    def dual_value(self, x: np.ndarray) -> float:
        """d(x) = -0.5 ||Ax||^2 + <c, x> - gamma ||x||_1 (closed form)."""
        ax = self.op.apply(x)
        return (-0.5 * float(ax @ ax) + float(self.c @ x)
                - self.gamma * float(np.sum(np.abs(x))))


def psi_value(y: np.ndarray, x_k: np.ndarray, lam: float,
              inst: LassoInstance) -> float:
    """Value of the reduced subproblem objective psi at y."""
    s = soft_threshold(x_k - lam * (inst.op.apply_adjoint(y) - inst.c),
                       lam * inst.gamma)
    return (0.5 * float(y @ y) + float(s @ s) / (2.0 * lam)
            - float(x_k @ x_k) / (2.0 * lam))


def psi_gradient(y: np.ndarray, x_k: np.ndarray, lam: float,
                 inst: LassoInstance) -> np.ndarray:
    """grad psi(y) = y - A soft_threshold(x_k - lam (A^T y - c), lam gamma).

    Lipschitz with constant 1 + lam ||A||^2; consistent with psi_value
    (verified against finite differences in the tests).
    """
    s = soft_threshold(x_k - lam * (inst.op.apply_adjoint(y) - inst.c),
                       lam * inst.gamma)
    return y - inst.op.apply(s)


def capital_psi(y: np.ndarray, x_k: np.ndarray, lam: float,
                inst: LassoInstance) -> np.ndarray:
    """The z-minimizer of the augmented Lagrangian at fixed y."""
    return project_linf_ball(x_k / lam - inst.op.apply_adjoint(y) + inst.c,
                             inst.gamma)


def aug_lagrangian_dual(y: np.ndarray, z: np.ndarray, x: np.ndarray,
                        lam: float, inst: LassoInstance) -> float:
    """L_lam(y, z, x) for the dual-constrained program (z must be feasible)."""
    if np.max(np.abs(z)) > inst.gamma * (1.0 + 1e-12):
        return math.inf
    r = inst.op.apply_adjoint(y) + z - inst.c
    return (0.5 * float(y @ y) - float(x @ r) + 0.5 * lam * float(r @ r))


def inner_solve_psi(x_k: np.ndarray, lam: float, inst: LassoInstance,
                    omega: float, warm_start: Optional[np.ndarray] = None,
                    max_iters: int = 200_000):
    """Gradient descent on psi until ||grad psi(y)|| <= omega.

    Fixed stepsize 1 / (1 + lam * op_norm^2).  By 1-strong convexity of psi
    the returned y has subproblem gap at most omega^2 / 2.

    Returns ``(y, z, inner_iters)``.
    """
    if omega <= 0:
        raise ValueError("omega must be positive")
    y = np.zeros(inst.m) if warm_start is None else np.asarray(
        warm_start, dtype=float).copy()
    step = 1.0 / (1.0 + lam * inst.op_norm ** 2)
    best = math.inf
    for it in range(max_iters + 1):
        g = psi_gradient(y, x_k, lam, inst)
        gnorm = float(np.linalg.norm(g))
        if not math.isfinite(gnorm):
            raise OracleError("non-finite inner gradient", best_point=y)
        if gnorm <= omega:
            return y, capital_psi(y, x_k, lam, inst), it
        best = min(best, gnorm)
        y = y - step * g
    raise OracleError(
        f"inner budget exhausted (best grad norm {best:.3e} > {omega:.3e})",
        best_point=y, achieved=best)


def eta_residual(x: np.ndarray, inst: LassoInstance) -> float:
    """Normalized fixed-point gap of the primal optimality condition."""
    r = inst.op.apply(x) - inst.b
    step = x - inst.op.apply_adjoint(r)
    num = float(np.linalg.norm(x - soft_threshold(step, inst.gamma)))
    den = 1.0 + float(np.linalg.norm(x)) + float(np.linalg.norm(r))
    return num / den


def box_muller(rng: np.random.Generator, size: int) -> np.ndarray:
    """Standard normal samples via Box-Muller over the seeded uniform stream.

    Platform-reproducible: depends only on the generator's uniform output.
    """
    pairs = (size + 1) // 2
    u1 = rng.random(pairs)
    u2 = rng.random(pairs)
    radius = np.sqrt(-2.0 * np.log1p(-u1))
    angle = 2.0 * math.pi * u2
    out = np.concatenate([radius * np.cos(angle), radius * np.sin(angle)])
    return out[:size]


def gen_random_instance(m: int, n: int, gamma_mode=("scaled", 1e-3),
                        seed: int = 0, lam: float = 0.01) -> LassoInstance:
    """Standard-Gaussian (A, b); gamma absolute or scaled by ||A^T b||_inf."""
    if m < 1 or n < 1:
        raise ValueError("m and n must be positive")
    rng = np.random.default_rng(seed)
    a = box_muller(rng, m * n).reshape(m, n)
    b = box_muller(rng, m)
    mode, value = gamma_mode
    if mode == "absolute":
        gamma = float(value)
    elif mode == "scaled":
        gamma = float(value) * float(np.max(np.abs(a.T @ b)))
    else:
        raise ValueError(f"unknown gamma mode {mode!r}")
    return LassoInstance(op=MatrixOperator(a), b=b, gamma=gamma, lam=lam,
                         seed=seed,
                         params={"m": m, "n": n, "gamma_mode": mode,
                                 "gamma_value": float(value)})


def save_instance(inst: LassoInstance, path: str) -> None:
    """Binary container (header, dims, row-major A, b, gamma, lam) plus a
    JSON sidecar with the generation parameters."""
    a = inst.matrix
    with open(path, "wb") as fh:
        fh.write(INSTANCE_MAGIC)
        fh.write(struct.pack("<II", INSTANCE_VERSION, 0))
        fh.write(struct.pack("<QQ", inst.m, inst.n))
        fh.write(a.astype("<f8").tobytes(order="C"))
        fh.write(inst.b.astype("<f8").tobytes())
        fh.write(struct.pack("<dd", inst.gamma, inst.lam))
    sidecar = {"seed": inst.seed, "params": inst.params}
    with open(path + ".json", "w") as fh:
        json.dump(sidecar, fh, indent=2)


def load_instance(path: str) -> LassoInstance:
    with open(path, "rb") as fh:
        magic = fh.read(8)
        if magic != INSTANCE_MAGIC:
            raise ValueError("not a lasso instance file")
        version, _ = struct.unpack("<II", fh.read(8))
        if version != INSTANCE_VERSION:
            raise ValueError(f"unsupported instance version {version}")
        m, n = struct.unpack("<QQ", fh.read(16))
        a = np.frombuffer(fh.read(8 * m * n), dtype="<f8").reshape(m, n).copy()
        b = np.frombuffer(fh.read(8 * m), dtype="<f8").copy()
        gamma, lam = struct.unpack("<dd", fh.read(16))
    seed, params = None, {}
    try:
        with open(path + ".json") as fh:
            sidecar = json.load(fh)
        seed = sidecar.get("seed")
        params = sidecar.get("params", {})
    except FileNotFoundError:
        pass
    return LassoInstance(op=MatrixOperator(a), b=b, gamma=gamma, lam=lam,
                         seed=seed, params=params)


class LassoSubproblemSolver:
    """Augmented-Lagrangian subproblem solver for the dual program.

    Converts a gap target into the gradient stopping level
    omega = sqrt(2 * gap_target) and runs :func:`inner_solve_psi`.  The
    primal answer is packed as the concatenated (y, z) vector.
    """

    def __init__(self, inst: LassoInstance, lam: float,
                 max_inner: int = 200_000):
        self.inst = inst
        self.lam = lam
        self.max_inner = max_inner
        self.last_y: Optional[np.ndarray] = None

    def solve(self, x_mult: np.ndarray, gap_target: float, warm=None):
        omega = math.sqrt(2.0 * gap_target)
        y, z, iters = inner_solve_psi(x_mult, self.lam, self.inst, omega,
                                      self.last_y, self.max_inner)
        self.last_y = y
        return np.concatenate([y, z]), gap_target, iters


def dual_program(inst: LassoInstance, lam: float) -> alm.EqualityConstrainedProblem:
    """The dual-constrained program in the generic equality-constrained form.

    Variables u = (y, z); constraint -A^T y - z = -c; multiplier x.
    """
    m, n = inst.m, inst.n

    def h_value(u):
        y, z = u[:m], u[m:]
        if np.max(np.abs(z)) > inst.gamma * (1.0 + 1e-12):
            return math.inf
        return 0.5 * float(y @ y)

    constraint = LinearOperator(
        (n, m + n),
        apply=lambda u: -inst.op.apply_adjoint(u[:m]) - u[m:],
        apply_adjoint=lambda x: np.concatenate([-inst.op.apply(x), -x]))
    return alm.EqualityConstrainedProblem(
        h_value=h_value, a=constraint, b=-inst.c,
        dual_value=inst.dual_value, name="lasso-dual")


#: Method presets of the benchmark protocol.
LASSO_PRESETS = ("GIALM-1.1", "GIALM-3", "IALM-1.5", "IALM-2")


def gialm_lasso_solve(inst: LassoInstance, preset: str = "GIALM-1.1",
                      lam: Optional[float] = None, eta_tol: float = 1e-6,
                      max_outer: int = 200_000,
                      time_budget: float = 4000.0,
                      eps1: float = 1.0, theta: float = 0.8,
                      max_inner: int = 200_000,
                      x1: Optional[np.ndarray] = None):
    """Run one benchmark cell.  Returns ``(summary: dict, trace)``.

    Stops on eta <= eta_tol, the outer-iteration cap, or the time budget.
    The starting multiplier defaults to x1 = 0.
    """
    if lam is None:
        lam = inst.lam
    prob = dual_program(inst, lam)
    solver = LassoSubproblemSolver(inst, lam, max_inner)
    x1 = np.zeros(inst.n) if x1 is None else np.asarray(x1, dtype=float)
    t0 = time.perf_counter()
    state = {"eta": eta_residual(x1, inst), "x": x1}
    eta_history = []

    def on_step(k, y, primal, res_norm, y_next):
        state["x"] = y_next
        state["eta"] = eta_residual(y_next, inst)
        eta_history.append(state["eta"])
        if state["eta"] <= eta_tol:
            return "eta_tol"
        return None

    if preset.startswith("GIALM-"):
        mu = float(preset.split("-", 1)[1])
        cfg = GippmConfig(lam=lam, mu=mu, eps1=eps1, theta=theta,
                          max_outer=max_outer, time_budget=time_budget)
        primal, x, trace, status = alm.gialm_solve(prob, solver, cfg,
                                                   y1=x1, callback=on_step)
    elif preset.startswith("IALM-"):
        q = float(preset.split("-", 1)[1])
        primal, x, trace, status = alm.ialm_baseline_solve(
            prob, solver, lam, q=q, max_outer=max_outer,
            time_budget=time_budget, y1=x1, callback=on_step)
    else:
        raise ValueError(f"unknown preset {preset!r}")
    elapsed = time.perf_counter() - t0
    trace.method = preset
    trace.metadata["method"] = preset
    summary = {
        "method": preset, "m": inst.m, "n": inst.n, "gamma": inst.gamma,
        "lambda": lam, "iter": len(trace),
        "eta": state["eta"], "total_inner": trace.total_inner_iters(),
        "time_s": elapsed, "status": type(status).__name__,
        "x_final": x, "eta_history": eta_history,
    }
    return summary, trace


def _piecewise_constant_image(side: int, rng: np.random.Generator,
                              blocks: int = 6) -> np.ndarray:
    img = np.zeros((side, side))
    for _ in range(blocks):
        r0, c0 = rng.integers(0, side, size=2)
        h = int(rng.integers(side // 8 + 1, side // 2 + 1))
        w = int(rng.integers(side // 8 + 1, side // 2 + 1))
        img[r0:r0 + h, c0:c0 + w] += rng.uniform(0.2, 1.0)
    peak = img.max()
    if peak > 0:
        img /= peak
    return img


def gaussian_kernel(radius: int, sigma: float) -> np.ndarray:
    if radius == 0:
        return np.ones((1, 1))
    ax = np.arange(-radius, radius + 1, dtype=float)
    gauss = np.exp(-0.5 * (ax / sigma) ** 2)
    kernel = np.outer(gauss, gauss)
    return kernel / kernel.sum()


def blur_operator(side: int, radius: int, sigma: float) -> LinearOperator:
    """2-D Gaussian blur with reflexive boundary handling, matrix-free.

    The kernel is even-symmetric and the reflexive extension makes the
    operator self-adjoint (verified to 1e-10 in the tests).
    """
    from scipy import ndimage

    kernel = gaussian_kernel(radius, sigma)

    def apply(x):
        img = np.asarray(x, dtype=float).reshape(side, side)
        return ndimage.correlate(img, kernel, mode="reflect").ravel()

    return LinearOperator((side * side, side * side), apply, apply)


def blur_instance(side: int = 32, kernel_radius: int = 4,
                  kernel_sigma: float = 4.0, noise_sigma: float = 1e-3,
                  seed: int = 0, gamma: float = 1e-4,
                  lam: float = 5.0) -> LassoInstance:
    """Desk-scale synthetic deblurring instance.

    b = blur(ground truth) + noise for a seeded piecewise-constant image.
    The primal starting point of the deblurring protocol is x1 = b.
    """
    if side > MAX_BLUR_SIDE:
        raise ValueError(
            f"side={side} exceeds the desk-scale cap of {MAX_BLUR_SIDE}; "
            "this build deliberately stays at desk scale")
    if side < 1:
        raise ValueError("side must be positive")
    rng = np.random.default_rng(seed)
    truth = _piecewise_constant_image(side, rng)
    op = blur_operator(side, kernel_radius, kernel_sigma)
    b = op.apply(truth.ravel()) + noise_sigma * box_muller(rng, side * side)
    inst = LassoInstance(op=op, b=b, gamma=gamma, lam=lam, seed=seed,
                         params={"side": side, "kernel_radius": kernel_radius,
                                 "kernel_sigma": kernel_sigma,
                                 "noise_sigma": noise_sigma})
    inst.params["truth"] = None  # ground truth not serialized
    inst.truth = truth
    return inst


def write_pgm(image: np.ndarray, path: str) -> None:
    """Write a grayscale image as a plain (P2) portable graymap."""
    img = np.asarray(image, dtype=float)
    lo, hi = float(img.min()), float(img.max())
    scale = 255.0 / (hi - lo) if hi > lo else 0.0
    pixels = np.round((img - lo) * scale).astype(int)
    lines = [f"P2", f"{img.shape[1]} {img.shape[0]}", "255"]
    for row in pixels:
        lines.append(" ".join(str(v) for v in row))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def format_grid_summary_row(test_id: str, summary: dict,
                            wall_times: bool = False) -> str:
    t = summary["time_s"] if wall_times else 0.0
    return (f"{test_id},{summary['method']},{summary['m']},{summary['n']},"
            f"{summary['iter']},{summary['eta']!r},{summary['total_inner']},"
            f"{t!r}")
