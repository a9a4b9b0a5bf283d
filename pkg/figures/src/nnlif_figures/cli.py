"""Gallery CLI: render from a spec file or one figure per subcommand."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .render import KINDS, FigureInputError, FigureSpec, render

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib


def _spec_from_table(table: dict, base: Path) -> FigureSpec:
    unknown = set(table) - {"kind", "input", "out", "title", "xlabel", "ylabel", "zoom_start"}
    if unknown:
        raise FigureInputError(f"unknown figure keys: {sorted(unknown)}")
    try:
        kind = table["kind"]
        input_path = table["input"]
        out = table["out"]
    except KeyError as exc:
        raise FigureInputError(f"figure table missing key {exc.args[0]!r}") from exc
    return FigureSpec(
        kind=kind,
        input=base / input_path,
        out=base / out,
        title=table.get("title", ""),
        xlabel=table.get("xlabel", ""),
        ylabel=table.get("ylabel", ""),
        zoom_start=float(table.get("zoom_start", 0.8)),
    )


def load_specs(path: Path) -> list[FigureSpec]:
    """One or more [[figure]] tables; relative paths resolve next to the file."""
    with open(path, "rb") as fh:
        raw = tomllib.load(fh)
    tables = raw.get("figure")
    if not isinstance(tables, list) or not tables:
        raise FigureInputError(f"{path}: expected at least one [[figure]] table")
    base = Path(path).parent
    return [_spec_from_table(table, base) for table in tables]


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="figures", description="Render solver CSVs to images")
    sub = parser.add_subparsers(dest="command", required=True)

    spec_p = sub.add_parser("spec", help="render every figure listed in a TOML spec file")
    spec_p.add_argument("specfile", type=Path)

    for kind in KINDS:
        kind_p = sub.add_parser(kind.replace("_", "-"), help=f"render a {kind} figure")
        kind_p.add_argument("input", type=Path, help="source CSV")
        kind_p.add_argument("--out", type=Path, required=True, help="output image path")
        kind_p.add_argument("--title", default="")
        if kind == "rate_birdview":
            kind_p.add_argument("--zoom-start", type=float, default=0.8)
    return parser


def main(argv=None) -> int:
    if argv is None:
        argv = sys.argv[1:]
    known = {"spec", "-h", "--help"} | {kind.replace("_", "-") for kind in KINDS}
    if argv and argv[0] not in known:
        # bare spec-file form: `figures gallery.toml`
        argv = ["spec", *argv]
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "spec":
            for spec in load_specs(args.specfile):
                print(render(spec))
        else:
            kind = args.command.replace("-", "_")
            spec = FigureSpec(
                kind=kind,
                input=args.input,
                out=args.out,
                title=args.title,
                zoom_start=getattr(args, "zoom_start", 0.8),
            )
            print(render(spec))
    except FigureInputError as exc:
        print(f"figure error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
