"""Figure renderer for igdopt trace, summary, and rate-report files."""

from .figures import (DPI, FIGURE_KINDS, FigureSpec, plot_traces,
                      render_deblur_figure, render_rate_figure,
                      render_trace_figure)
from .schema import (GRID_COLUMNS, RATE_COLUMNS, TRACE_COLUMNS, SchemaError,
                     TraceData, read_grid, read_rate_report, read_trace)

__version__ = "0.1.0"

__all__ = [
    "DPI", "FIGURE_KINDS", "FigureSpec", "plot_traces",
    "render_deblur_figure", "render_rate_figure", "render_trace_figure",
    "GRID_COLUMNS", "RATE_COLUMNS", "TRACE_COLUMNS", "SchemaError",
    "TraceData", "read_grid", "read_rate_report", "read_trace",
    "__version__",
]
