"""Readers for the delimited artifact formats produced by igdopt.

plotviz talks to the solver package only through these files; it never
imports igdopt. Each reader validates the header and row shape and raises
:class:`SchemaError` (naming the expected header) on anything malformed.
"""

from __future__ import annotations

from dataclasses import dataclass, field

TRACE_COLUMNS = ("k", "f_val", "grad_norm", "eps_k", "i_k", "inner_iters",
                 "elapsed_s")
GRID_COLUMNS = ("test_id", "method", "m", "n", "iter", "eta", "total_inner",
                "time_s")
RATE_COLUMNS = ("function_p", "q", "quantity", "predicted_exp", "fitted_exp",
                "residual")

_TRACE_TYPES = (int, float, float, float, int, int, float)
_GRID_TYPES = (str, str, int, int, int, float, int, float)
_RATE_TYPES = (float, float, str, float, float, float)


class SchemaError(ValueError):
    """An input file does not conform to the documented column layout."""


@dataclass
class TraceData:
    """One solver trace: parsed rows plus the metadata header."""

    metadata: dict = field(default_factory=dict)
    columns: dict = field(default_factory=dict)

    @property
    def method(self) -> str:
        return self.metadata.get("method", "")

    def __len__(self) -> int:
        return len(self.columns.get("k", ()))


def _read_text(path_or_file) -> str:
    if hasattr(path_or_file, "read"):
        return path_or_file.read()
    with open(path_or_file) as fh:
        return fh.read()


def _parse_rows(lines, columns, types, label):
    if not lines or tuple(lines[0].split(",")) != columns:
        raise SchemaError(
            f"{label}: expected header {','.join(columns)!r}")
    rows = []
    for ln in lines[1:]:
        cells = ln.split(",")
        if len(cells) != len(columns):
            raise SchemaError(
                f"{label}: malformed row {ln!r} "
                f"(expected header {','.join(columns)!r})")
        try:
            rows.append(tuple(t(c) for t, c in zip(types, cells)))
        except ValueError as exc:
            raise SchemaError(f"{label}: bad cell in row {ln!r}: {exc}") from exc
    if not rows:
        raise SchemaError(f"{label}: no data rows")
    return rows


def read_trace(path_or_file) -> TraceData:
    """Parse a per-iteration trace file (optional ``# metadata:`` header)."""
    lines = [ln for ln in _read_text(path_or_file).splitlines() if ln.strip()]
    if not lines:
        raise SchemaError(
            f"trace: empty file (expected header {','.join(TRACE_COLUMNS)!r})")
    metadata: dict = {}
    if lines[0].startswith("# metadata:"):
        body = lines.pop(0)[len("# metadata:"):].strip()
        for part in filter(None, body.split(";")):
            key, _, value = part.partition("=")
            metadata[key.strip()] = value
    rows = _parse_rows(lines, TRACE_COLUMNS, _TRACE_TYPES, "trace")
    columns = {name: [row[i] for row in rows]
               for i, name in enumerate(TRACE_COLUMNS)}
    return TraceData(metadata=metadata, columns=columns)


def read_grid(path_or_file) -> list[dict]:
    """Parse a benchmark-grid summary file into one dict per row."""
    lines = [ln for ln in _read_text(path_or_file).splitlines() if ln.strip()]
    if not lines:
        raise SchemaError(
            f"grid: empty file (expected header {','.join(GRID_COLUMNS)!r})")
    rows = _parse_rows(lines, GRID_COLUMNS, _GRID_TYPES, "grid")
    return [dict(zip(GRID_COLUMNS, row)) for row in rows]


def read_rate_report(path_or_file) -> list[dict]:
    """Parse a rate-fit report file into one dict per row."""
    lines = [ln for ln in _read_text(path_or_file).splitlines() if ln.strip()]
    if not lines:
        raise SchemaError(
            f"rate report: empty file "
            f"(expected header {','.join(RATE_COLUMNS)!r})")
    rows = _parse_rows(lines, RATE_COLUMNS, _RATE_TYPES, "rate report")
    return [dict(zip(RATE_COLUMNS, row)) for row in rows]
