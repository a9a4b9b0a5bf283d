"""Command-line entry point.

Exit codes: 0 on success (a detected blow-up is a successful outcome), 2 for
configuration errors, 3 for numerical failure outside a blow-up scenario.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import __version__
from .harness import ConfigError, convergence_order, find_stationary_rates, load_config, run_scenario
from .output import _fmt, write_orders, write_run


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nnlif",
        description="Finite-volume solver for integrate-and-fire Fokker-Planck dynamics",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run one scenario and write its CSV outputs")
    run_p.add_argument("config", type=Path)
    run_p.add_argument("--out", type=Path, required=True, help="output directory")
    run_p.add_argument("--quiet", action="store_true")

    conv_p = sub.add_parser("convergence", help="self-convergence study under refinement")
    conv_p.add_argument("config", type=Path)
    conv_p.add_argument("--axis", choices=["space", "time"], required=True)
    conv_p.add_argument("--levels", type=int, required=True)
    conv_p.add_argument("--out", type=Path, required=True)
    conv_p.add_argument("--quiet", action="store_true")

    stat_p = sub.add_parser("stationary", help="print stationary firing rates")
    stat_p.add_argument("config", type=Path)
    stat_p.add_argument("--out", type=Path, default=None)
    stat_p.add_argument("--quiet", action="store_true")
    return parser


def _cmd_run(args) -> int:
    cfg = load_config(args.config)
    result = run_scenario(cfg, quiet=args.quiet)
    write_run(result, cfg.grid().nodes, args.out, cfg.outputs.entropy, cfg.outputs.energy)
    if not args.quiet:
        print(f"stop reason: {result.stop_reason} at t = {result.stop_time:g}")
        print(f"final mass:  {result.masses[-1] + result.refractory[-1]:.12g}")
        print(f"outputs in:  {args.out}")
    if result.stop_reason == "instability":
        return 3
    return 0


def _cmd_convergence(args) -> int:
    cfg = load_config(args.config)
    try:
        rows = convergence_order(cfg, args.axis, args.levels)
    except ValueError as exc:
        raise ConfigError([f"levels: {exc}"]) from exc
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    write_orders(rows, outdir)
    if not args.quiet:
        label = "h" if args.axis == "space" else "tau"
        for row in rows:
            err = "unstable" if row.err_l1 is None else f"{row.err_l1:.4e}"
            order = "" if row.order_l1 is None else f"{row.order_l1:.3f}"
            print(f"level {row.level}: {label}={row.h_or_tau:.6g}  L1 err={err}  order={order}")
        print(f"outputs in:  {outdir}")
    return 0


def _cmd_stationary(args) -> int:
    cfg = load_config(args.config)
    rates = find_stationary_rates(cfg.params, cfg.grid())
    if not args.quiet and not rates:
        print("no stationary rate found (valid outcome for strongly excitatory networks)")
    for rate in rates:
        print(_fmt(rate))
    if args.out is not None:
        outdir = Path(args.out)
        outdir.mkdir(parents=True, exist_ok=True)
        with open(outdir / "rates.csv", "w", newline="") as fh:
            fh.write("n_inf\r\n")
            for rate in rates:
                fh.write(f"{_fmt(rate)}\r\n")
    return 0


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    handlers = {"run": _cmd_run, "convergence": _cmd_convergence, "stationary": _cmd_stationary}
    try:
        return handlers[args.command](args)
    except ConfigError as exc:
        for problem in exc.problems:
            print(f"config error: {problem}", file=sys.stderr)
        return 2
    except (ArithmeticError, FloatingPointError, ValueError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
