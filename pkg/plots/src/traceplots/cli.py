"""Figure rendering command line.

Usage: render --kind <trajectory|errors|efforts|comparison> --in trace.csv
[trace.csv ...] --out figure.png
"""

from __future__ import annotations

import argparse
import sys

from .figures import FIGURE_KINDS, render
from .reader import TraceFormatError


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="render",
        description="Render standard figures from simulation trace CSVs.")
    parser.add_argument("--kind", required=True, choices=FIGURE_KINDS,
                        help="figure kind to render")
    parser.add_argument("--in", dest="inputs", required=True, nargs="+",
                        metavar="CSV", help="input trace file(s)")
    parser.add_argument("--out", required=True, help="output image path")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        render(args.kind, args.inputs, args.out)
    except TraceFormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(f"{args.kind}: {len(args.inputs)} trace(s) -> {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
