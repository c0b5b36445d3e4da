"""Command line front end.

    sle-plots <kind> --in <files...> [--report <report.json>] --out <image>

Kinds: trace, hull, density_overlay, dimension_fit.  Inputs are sle-lab
export files; the report JSON supplies experiment parameters (required for
density_overlay, optional decoration elsewhere).
"""

from __future__ import annotations

import argparse
import sys

from .render import KINDS, PlotJob, render


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="sle-plots", description=__doc__)
    parser.add_argument("kind", choices=KINDS)
    parser.add_argument("--in", dest="inputs", nargs="+", required=True, metavar="FILE")
    parser.add_argument("--report", default=None)
    parser.add_argument("--out", required=True)
    args = parser.parse_args(argv)
    try:
        info = render(PlotJob(kind=args.kind, inputs=tuple(args.inputs),
                              output=args.out, report=args.report))
    except (ValueError, FileNotFoundError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(f"wrote {info.output} ({info.n_samples} sample(s))")
    return 0


if __name__ == "__main__":
    sys.exit(main())
