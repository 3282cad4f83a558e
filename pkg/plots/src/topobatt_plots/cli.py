"""CLI: render one figure from producer CSVs, or just validate a schema."""

from __future__ import annotations

import argparse
import sys

from .render import KINDS, PlotSpec, render
from .schema import SCHEMAS, verify_schema


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="topobatt-plot",
        description="Render topobatt CSV output as figures",
    )
    parser.add_argument("--kind", required=True, choices=sorted(set(KINDS) | set(SCHEMAS)))
    parser.add_argument("--in", dest="inputs", action="append", required=True,
                        help="input CSV (repeatable for timeseries)")
    parser.add_argument("--overlay", default=None, help="overlay-curve CSV (heatmap)")
    parser.add_argument("--out", default=None, help="output image path")
    parser.add_argument("--title", default="")
    parser.add_argument("--verify-only", action="store_true",
                        help="validate the input schema and exit")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    reports = [verify_schema(path, args.kind if args.kind in SCHEMAS else "heatmap")
               for path in args.inputs]
    if args.overlay:
        reports.append(verify_schema(args.overlay, "overlay"))
    failed = [r for r in reports if not r.ok]
    for r in reports:
        if not r.ok or r.extra or args.verify_only:
            print(r.summary(), file=sys.stderr if not r.ok else sys.stdout)
    if failed:
        return 2
    if args.verify_only:
        return 0
    if args.out is None:
        print("error: --out is required unless --verify-only", file=sys.stderr)
        return 2
    try:
        spec = PlotSpec(kind=args.kind, inputs=tuple(args.inputs),
                        output=args.out, overlay=args.overlay, title=args.title)
        render(spec)
    except (ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(args.out)
    return 0


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
