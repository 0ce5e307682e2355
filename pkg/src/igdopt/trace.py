"""Per-iteration trace recording and the delimited trace format."""

from __future__ import annotations

import io
from dataclasses import dataclass, field
from typing import Optional

TRACE_COLUMNS = ("k", "f_val", "grad_norm", "eps_k", "i_k", "inner_iters",
                 "elapsed_s")


class TraceOrderError(ValueError):
    """Records must arrive with consecutive iteration indices."""


class TraceSchemaError(ValueError):
    """A trace file does not conform to the documented column layout."""


@dataclass
class IterationRecord:
    k: int
    f_val: float
    grad_norm_or_residual: float
    eps_k: float
    i_k: int
    inner_iters: int = 0
    elapsed: float = 0.0

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("iteration index starts at 1")
        if self.eps_k <= 0:
            raise ValueError("eps_k must be positive")
        if self.grad_norm_or_residual < 0 or self.i_k < 0 or self.inner_iters < 0:
            raise ValueError("negative counter in iteration record")


@dataclass
class IterationTrace:
    """Ordered iteration log plus run metadata.

    ``eps_{k+1} = theta**i_k * eps_k`` holds across consecutive records of a
    single run by construction of the solvers; :meth:`append` only enforces
    the index ordering.
    """

    method: str = ""
    metadata: dict = field(default_factory=dict)
    records: list[IterationRecord] = field(default_factory=list)

    def append(self, rec: IterationRecord) -> None:
        expected = self.records[-1].k + 1 if self.records else 1
        if rec.k != expected:
            raise TraceOrderError(f"expected k={expected}, got k={rec.k}")
        self.records.append(rec)

    def __len__(self) -> int:
        return len(self.records)

    def column(self, name: str) -> list[float]:
        attr = {"k": "k", "f_val": "f_val", "grad_norm": "grad_norm_or_residual",
                "eps_k": "eps_k", "i_k": "i_k", "inner_iters": "inner_iters",
                "elapsed_s": "elapsed"}[name]
        return [getattr(r, attr) for r in self.records]

    def total_inner_iters(self) -> int:
        return sum(r.inner_iters for r in self.records)


def format_metadata(metadata: dict) -> str:
    parts = [f"{k}={v}" for k, v in metadata.items()]
    return "# metadata: " + ";".join(parts)


def write_trace_csv(trace: IterationTrace, path_or_file,
                    wall_times: bool = False) -> None:
    """Write a trace in the documented schema.

    With ``wall_times`` off (the default) the elapsed column is written as 0
    so two runs of the same seeded configuration produce byte-identical
    bodies; measured wall time stays available in the metadata header.
    """
    meta = dict(trace.metadata)
    if trace.method:
        meta.setdefault("method", trace.method)
    lines = [format_metadata(meta), ",".join(TRACE_COLUMNS)]
    for r in trace.records:
        elapsed = r.elapsed if wall_times else 0.0
        lines.append(f"{r.k},{r.f_val!r},{r.grad_norm_or_residual!r},"
                     f"{r.eps_k!r},{r.i_k},{r.inner_iters},{elapsed!r}")
    text = "\n".join(lines) + "\n"
    if hasattr(path_or_file, "write"):
        path_or_file.write(text)
    else:
        with open(path_or_file, "w") as fh:
            fh.write(text)


def read_trace_csv(path_or_file) -> IterationTrace:
    if hasattr(path_or_file, "read"):
        text = path_or_file.read()
    else:
        with open(path_or_file) as fh:
            text = fh.read()
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise TraceSchemaError("empty trace file")
    metadata: dict = {}
    if lines[0].startswith("# metadata:"):
        body = lines.pop(0)[len("# metadata:"):].strip()
        for part in filter(None, body.split(";")):
            key, _, value = part.partition("=")
            metadata[key.strip()] = value
    if not lines or tuple(lines[0].split(",")) != TRACE_COLUMNS:
        raise TraceSchemaError(
            f"expected header {','.join(TRACE_COLUMNS)!r}")
    trace = IterationTrace(method=metadata.get("method", ""), metadata=metadata)
    for ln in lines[1:]:
        cells = ln.split(",")
        if len(cells) != len(TRACE_COLUMNS):
            raise TraceSchemaError(f"malformed row: {ln!r}")
        trace.append(IterationRecord(
            k=int(cells[0]), f_val=float(cells[1]),
            grad_norm_or_residual=float(cells[2]), eps_k=float(cells[3]),
            i_k=int(cells[4]), inner_iters=int(cells[5]),
            elapsed=float(cells[6])))
    return trace


def trace_csv_body(trace: IterationTrace, wall_times: bool = False) -> str:
    """Rows only (no metadata header); used for reproducibility comparisons."""
    buf = io.StringIO()
    write_trace_csv(trace, buf, wall_times=wall_times)
    lines = buf.getvalue().splitlines()
    return "\n".join(ln for ln in lines if not ln.startswith("#")) + "\n"
