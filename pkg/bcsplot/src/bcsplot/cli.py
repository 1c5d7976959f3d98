"""bcs-plot: figures from experiment CSVs."""

from __future__ import annotations

import argparse
import sys

from .data import CsvFormatError
from .render import KINDS, PlotSpec, render


def main(argv=None) -> int:
    p = argparse.ArgumentParser(prog="bcs-plot", description=__doc__)
    p.add_argument("--csv", required=True, help="experiment results CSV")
    p.add_argument("--kind", required=True, choices=KINDS)
    p.add_argument("--overlay-nsq", action="store_true", help="draw M = (n/s)^2 on the contour")
    p.add_argument("--out", required=True, help="output image (.svg or .png)")
    args = p.parse_args(argv)
    try:
        out = render(PlotSpec(args.csv, args.kind, args.out, args.overlay_nsq))
    except (CsvFormatError, ValueError, OSError) as exc:
        print(f"bcs-plot: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
