"""krqr-plot: regenerate publication-style figures from krqr outputs.

Usage:
    krqr-plot energy --in fig2.csv [--in fig2b.csv] --out fig2.png
              [--delta-e] [--log-x] [--log-y] [--inset T_LO T_HI]
    krqr-plot filter --in fig4.csv --out fig4.png
    krqr-plot reconstruction --in recon.json --out recon.png
"""

from __future__ import annotations

import argparse
import sys

from .io import SchemaError
from .plots import PLOTTERS, PlotSpec, make_plot


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="krqr-plot",
        description="Plot kicked-rotor simulation results")
    parser.add_argument("kind", choices=sorted(PLOTTERS),
                        help="figure kind")
    parser.add_argument("--in", dest="inputs", action="append", required=True,
                        metavar="PATH", help="input CSV/JSON (repeatable)")
    parser.add_argument("--out", required=True, help="output image path")
    parser.add_argument("--delta-e", action="store_true",
                        help="plot E(t) - E(0) instead of E(t)")
    parser.add_argument("--log-x", action="store_true")
    parser.add_argument("--log-y", action="store_true")
    parser.add_argument("--inset", nargs=2, type=float, metavar=("LO", "HI"),
                        help="add an early-time inset over [LO, HI]")
    return parser


def cli_main(argv=None) -> int:
    try:
        args = _build_parser().parse_args(argv)
    except SystemExit as exc:
        return 1 if exc.code else 0
    spec = PlotSpec(
        inputs=tuple(args.inputs),
        output=args.out,
        kind=args.kind,
        subtract_initial=args.delta_e,
        log_x=args.log_x,
        log_y=args.log_y,
        inset=tuple(args.inset) if args.inset else None,
    )
    try:
        written = make_plot(spec)
    except (SchemaError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(written)
    return 0


def main() -> int:
    return cli_main(sys.argv[1:])


if __name__ == "__main__":
    sys.exit(main())
