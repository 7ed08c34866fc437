"""Command-line entry: render convergence panels from harness CSV output.

    nls-figures render --input r.csv --x tau --slopes 0.4,0.7,1.0 --out fig.png

Exit codes: 0 success, 2 schema or usage error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .render import PanelSpec, SchemaError, render_convergence


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="nls-figures")
    sub = parser.add_subparsers(dest="command", required=True)
    sp = sub.add_parser("render", help="render one log-log convergence panel")
    sp.add_argument("--input", type=Path, required=True, help="harness CSV report")
    sp.add_argument("--x", choices=("tau", "n_modes"), required=True)
    sp.add_argument("--slopes", default="", help="comma list of guide-line slopes")
    sp.add_argument("--out", type=Path, required=True)
    sp.add_argument("--mirror", type=Path, help="JSON mirror (default: input with .json)")
    return parser


def run_cli(argv) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    slopes = tuple(float(s) for s in args.slopes.split(",") if s.strip())
    spec = PanelSpec(
        input_csv=args.input,
        x_column=args.x,
        output=args.out,
        reference_slopes=slopes,
        mirror=args.mirror,
    )
    try:
        result = render_convergence(spec)
    except SchemaError as exc:
        print(f"nls-figures: schema error: {exc}", file=sys.stderr)
        return 2
    print(f"wrote {result.output} ({len(result.groups)} series)")
    return 0


def main() -> int:
    return run_cli(sys.argv[1:])


if __name__ == "__main__":
    sys.exit(main())
