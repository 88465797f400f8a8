"""Figure rendering CLI: ``plots <estimation|errors> --csv <path> --out <path>``."""
from __future__ import annotations

import argparse
import sys

from .figures import plot_errors, plot_estimation
from .frames import SchemaError


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="plots", description="Render figures from a simulation trace CSV."
    )
    sub = parser.add_subparsers(dest="figure", required=True)
    for name, help_text in (
        ("estimation", "truth vs estimate time series"),
        ("errors", "error norms and Lyapunov value"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--csv", required=True, help="simulation trace CSV")
        p.add_argument("--out", required=True, help="output image path")
    args = parser.parse_args(argv)

    render = plot_estimation if args.figure == "estimation" else plot_errors
    try:
        result = render(args.csv, args.out)
    except SchemaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"gnss markers:         {result.gnss_markers}")
    print(f"magnetometer markers: {result.mag_markers}")
    for path in result.outputs:
        print(f"wrote {path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
