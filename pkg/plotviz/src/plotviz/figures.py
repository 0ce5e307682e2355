"""Figure construction from igdopt artifact files.

All rendering goes through the non-interactive Agg backend with a pinned
style and dpi, so rendering the same inputs twice produces identical image
bytes.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .schema import SchemaError, TraceData, read_rate_report, read_trace

DPI = 100
# Quantities that decay toward zero read best on a log axis.
LOG_DEFAULT_QUANTITIES = frozenset({"grad_norm", "eps_k"})
FIGURE_KINDS = ("trace", "deblur", "rates")


@dataclass
class FigureSpec:
    """One figure request: inputs, curve selection, axes, output path."""

    kind: str
    inputs: tuple
    output: str
    methods: tuple = ()
    quantity: str = "grad_norm"
    x_axis: str = "k"
    y_scale: str = ""
    title: str = ""

    def __post_init__(self):
        self.inputs = tuple(self.inputs)
        self.methods = tuple(self.methods)
        if self.kind not in FIGURE_KINDS:
            raise ValueError(f"unknown figure kind {self.kind!r}; "
                             f"expected one of {FIGURE_KINDS}")
        if not self.inputs:
            raise ValueError("figure spec needs at least one input file")
        if self.x_axis not in ("k", "time"):
            raise ValueError("x_axis must be 'k' or 'time'")
        if self.y_scale not in ("", "linear", "log"):
            raise ValueError("y_scale must be 'linear' or 'log'")


def _apply_style(ax, x_label, y_label, y_scale):
    ax.set_xlabel(x_label)
    ax.set_ylabel(y_label)
    if y_scale == "log":
        ax.set_yscale("log")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend()


def _load_traces(spec: FigureSpec) -> list[TraceData]:
    traces = [read_trace(path) for path in spec.inputs]
    if spec.methods:
        by_method = {t.method: t for t in traces}
        missing = [m for m in spec.methods if m not in by_method]
        if missing:
            raise SchemaError(
                f"requested method(s) {missing} not present in inputs; "
                f"found {sorted(by_method)}")
        traces = [by_method[m] for m in spec.methods]
    return traces


def _x_values(trace: TraceData, x_axis: str):
    if x_axis == "time":
        elapsed = trace.columns["elapsed_s"]
        if any(v > 0 for v in elapsed):
            return elapsed, "time (s)"
    return trace.columns["k"], "iteration k"


def render_trace_figure(traces, quantity="grad_norm", x_axis="k",
                        y_scale="", title=""):
    """One panel, one labeled curve per trace."""
    if quantity not in traces[0].columns:
        raise SchemaError(f"unknown trace quantity {quantity!r}; expected one "
                          f"of {tuple(traces[0].columns)}")
    scale = y_scale or ("log" if quantity in LOG_DEFAULT_QUANTITIES
                        else "linear")
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    x_label = "iteration k"
    for trace in traces:
        xs, x_label = _x_values(trace, x_axis)
        label = trace.method or "trace"
        ys = trace.columns[quantity]
        if scale == "log":
            ys = [max(v, 1e-300) for v in ys]
        ax.plot(xs, ys, label=label)
    _apply_style(ax, x_label, quantity, scale)
    if title:
        ax.set_title(title)
    fig.tight_layout()
    return fig


def render_deblur_figure(traces, title=""):
    """Two panels: objective value (left) and cumulative inner work (right).

    The left panel uses wall time when the traces carry it and the iteration
    index otherwise; the right panel accumulates the per-outer-step inner
    iteration counts.
    """
    fig, (ax_obj, ax_inner) = plt.subplots(1, 2, figsize=(10.0, 4.0))
    for trace in traces:
        label = trace.method or "trace"
        xs, x_label = _x_values(trace, "time")
        ax_obj.plot(xs, trace.columns["f_val"], label=label)
        cumulative = np.cumsum(trace.columns["inner_iters"])
        ax_inner.plot(trace.columns["k"], cumulative, label=label)
    _apply_style(ax_obj, x_label, "objective value", "linear")
    _apply_style(ax_inner, "outer iteration k", "cumulative inner iterations",
                 "linear")
    if title:
        fig.suptitle(title)
    fig.tight_layout()
    return fig


def render_rate_figure(rows, k_range=(100.0, 1.0e4), title=""):
    """Log-log decay lines from a rate report.

    Each report row contributes a fitted-slope line ``k**fitted_exp`` plus a
    dashed guide line at the predicted exponent, both normalized to 1 at the
    window start so slopes are directly comparable.
    """
    ks = np.geomspace(k_range[0], k_range[1], 64)
    fig, ax = plt.subplots(figsize=(6.0, 4.5))
    for row in rows:
        base = f"p={row['function_p']:g} {row['quantity']}"
        fitted = (ks / ks[0]) ** row["fitted_exp"]
        guide = (ks / ks[0]) ** row["predicted_exp"]
        line, = ax.plot(ks, fitted,
                        label=f"{base} (fitted {row['fitted_exp']:+.2f})")
        ax.plot(ks, guide, linestyle="--", color=line.get_color(), alpha=0.6,
                label=f"{base} (predicted {row['predicted_exp']:+.2f})")
    ax.set_xscale("log")
    _apply_style(ax, "iteration k", "normalized decay", "log")
    if title:
        ax.set_title(title)
    fig.tight_layout()
    return fig


def plot_traces(spec: FigureSpec) -> str:
    """Render the figure described by ``spec`` and return the output path."""
    if spec.kind == "rates":
        rows = []
        for path in spec.inputs:
            rows.extend(read_rate_report(path))
        fig = render_rate_figure(rows, title=spec.title)
    else:
        traces = _load_traces(spec)
        if spec.kind == "deblur":
            fig = render_deblur_figure(traces, title=spec.title)
        else:
            fig = render_trace_figure(traces, quantity=spec.quantity,
                                      x_axis=spec.x_axis,
                                      y_scale=spec.y_scale, title=spec.title)
    try:
        fig.savefig(spec.output, dpi=DPI)
    finally:
        plt.close(fig)
    return spec.output
