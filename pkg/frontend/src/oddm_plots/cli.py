"""Figure CLI: oddm-plot --kind <k> --in <csv...> --out <png> [--dump-table]."""

import argparse
import sys

from .render import FIGURE_KINDS, FigureSpec, RenderError, render


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="oddm-plot",
        description="Render BER figures from simulator result CSVs.",
    )
    parser.add_argument("--kind", required=True, choices=FIGURE_KINDS)
    parser.add_argument("--in", dest="inputs", required=True, nargs="+",
                        metavar="CSV")
    parser.add_argument("--out", required=True, help="output image path")
    parser.add_argument("--log-y", default=True,
                        action=argparse.BooleanOptionalAction)
    parser.add_argument("--dump-table", action="store_true",
                        help="echo exactly the rows plotted")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    spec = FigureSpec(kind=args.kind, inputs=args.inputs, output=args.out,
                      log_y=args.log_y, dump_table=args.dump_table)
    try:
        table_text = render(spec)
    except RenderError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 2
    if args.dump_table:
        print(table_text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
