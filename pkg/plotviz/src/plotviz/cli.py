"""Command-line entry point: render figures from igdopt artifact files."""

from __future__ import annotations

import argparse
import sys

from .figures import FigureSpec, plot_traces
from .schema import SchemaError

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_USAGE = 64


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="plotviz",
        description="Render figures from solver trace/summary CSV files.")
    sub = parser.add_subparsers(dest="command", required=True)

    traces = sub.add_parser("traces", help="one panel, one curve per trace")
    traces.add_argument("inputs", nargs="+", help="trace CSV files")
    traces.add_argument("--quantity", default="grad_norm",
                        help="trace column to plot (default grad_norm)")
    traces.add_argument("--x-axis", choices=("k", "time"), default="k")
    traces.add_argument("--y-scale", choices=("linear", "log"), default="")
    traces.add_argument("--methods", default="",
                        help="comma-separated method labels to select")
    traces.add_argument("--out", required=True, help="output image path")
    traces.add_argument("--title", default="")

    deblur = sub.add_parser(
        "deblur", help="two panels: objective and cumulative inner work")
    deblur.add_argument("inputs", nargs="+", help="trace CSV files")
    deblur.add_argument("--methods", default="")
    deblur.add_argument("--out", required=True)
    deblur.add_argument("--title", default="")

    rates = sub.add_parser(
        "rates", help="log-log decay lines with predicted-slope guides")
    rates.add_argument("inputs", nargs="+", help="rate report CSV files")
    rates.add_argument("--out", required=True)
    rates.add_argument("--title", default="")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    methods = tuple(m for m in getattr(args, "methods", "").split(",") if m)
    spec_kind = {"traces": "trace", "deblur": "deblur", "rates": "rates"}
    try:
        spec = FigureSpec(
            kind=spec_kind[args.command], inputs=tuple(args.inputs),
            output=args.out, methods=methods,
            quantity=getattr(args, "quantity", "grad_norm"),
            x_axis=getattr(args, "x_axis", "k"),
            y_scale=getattr(args, "y_scale", ""), title=args.title)
        path = plot_traces(spec)
    except SchemaError as exc:
        print(f"schema error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    print(f"wrote {path}")
    return EXIT_OK


if __name__ == "__main__":
    raise SystemExit(main())
