"""Command line entry: plot <kind> --in CSV --out PNG [overlay flags]."""

import argparse
import sys

from .io import SchemaError
from .render import PlotJob, render_scaling, render_surface


def main(argv=None):
    p = argparse.ArgumentParser(prog="plot", description=__doc__)
    p.add_argument("kind", choices=["surface", "scaling"])
    p.add_argument("--in", dest="input_csv", required=True)
    p.add_argument("--out", dest="output_png", required=True)
    p.add_argument("--overlay", choices=["heat_neumann", "wave"], default=None)
    p.add_argument("--t", type=float, default=None)
    p.add_argument("--ell", type=float, default=None)
    p.add_argument("--lip", type=float, default=None)
    try:
        args = p.parse_args(argv)
    except SystemExit:
        return 2
    job = PlotJob(input_csv=args.input_csv, kind=args.kind, output_png=args.output_png,
                  overlay=args.overlay, t=args.t, ell=args.ell, lip=args.lip)
    try:
        if args.kind == "surface":
            res = render_surface(job)
            extra = f"lambda = {res.lam:g}, " if res.lam is not None else ""
            print(f"wrote {res.output_png} ({extra}max = {res.max_value:.2f})")
        else:
            res = render_scaling(job)
            print(f"wrote {res.output_png} (slope = {res.slope:.2f}, {res.n_points} points)")
        return 0
    except (SchemaError, OSError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
