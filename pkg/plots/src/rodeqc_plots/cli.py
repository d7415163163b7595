"""CLI: ``rodeqc-plot <kind> --in <csv> --out <img>``."""

from __future__ import annotations

import argparse
import sys

from .render import KINDS, FigureSpec, SchemaError, render


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="rodeqc-plot",
        description="Render rode-qctl CSV artifacts (violin / sweep / bloch).",
    )
    sub = parser.add_subparsers(dest="kind", required=True)
    for kind in KINDS:
        p = sub.add_parser(kind)
        p.add_argument("--in", dest="input_csv", required=True, help="input CSV")
        p.add_argument("--out", dest="output_image", required=True, help="output image")
        p.add_argument("--title", default=None)
        p.add_argument(
            "--no-means", action="store_true",
            help="violin kind: suppress the dashed mean lines",
        )
    args = parser.parse_args(argv)
    spec = FigureSpec(
        kind=args.kind,
        input_csv=args.input_csv,
        output_image=args.output_image,
        title=args.title,
        show_means=not args.no_means,
    )
    try:
        payload = render(spec)
    except SchemaError as exc:
        print(f"schema error: {exc}", file=sys.stderr)
        return 2
    print(f"wrote {args.output_image} ({payload['rows']} rows)")
    return 0


if __name__ == "__main__":
    sys.exit(main())
