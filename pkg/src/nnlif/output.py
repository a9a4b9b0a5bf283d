"""CSV writers for run and convergence results.

All files are RFC-4180 with a header row; floats carry 17 significant digits
so reruns can be compared bit for bit.
"""

from __future__ import annotations

import csv
from pathlib import Path

from .harness import ConvergenceRow, RunResult


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def _writer(path: Path):
    fh = open(path, "w", newline="")
    return fh, csv.writer(fh)


def write_rate(result: RunResult, outdir: Path) -> Path:
    path = outdir / "rate.csv"
    fh, w = _writer(path)
    with fh:
        w.writerow(["t", "N"])
        for t, n in zip(result.rate_times, result.rates):
            w.writerow([_fmt(t), _fmt(n)])
    return path


def write_mass(result: RunResult, outdir: Path) -> Path:
    path = outdir / "mass.csv"
    fh, w = _writer(path)
    with fh:
        w.writerow(["t", "mass", "R"])
        for t, m, r in zip(result.mass_times, result.masses, result.refractory):
            w.writerow([_fmt(t), _fmt(m), _fmt(r)])
    return path


def write_snapshots(result: RunResult, nodes, outdir: Path) -> Path:
    path = outdir / "snapshots.csv"
    fh, w = _writer(path)
    with fh:
        w.writerow(["t", "v", "p"])
        for t, p in result.snapshots:
            for v, value in zip(nodes, p):
                w.writerow([_fmt(t), _fmt(v), _fmt(value)])
    return path


def write_entropy(result: RunResult, outdir: Path) -> Path:
    path = outdir / "entropy.csv"
    fh, w = _writer(path)
    with fh:
        w.writerow(["t", "S", "bulk", "boundary"])
        if result.entropy is not None:
            for t, s, bulk, boundary in result.entropy:
                w.writerow([_fmt(t), _fmt(s), _fmt(bulk), _fmt(boundary)])
    return path


def write_energy(result: RunResult, outdir: Path) -> Path:
    path = outdir / "energy.csv"
    fh, w = _writer(path)
    with fh:
        w.writerow(["t", "E"])
        if result.energy is not None:
            for t, e in result.energy:
                w.writerow([_fmt(t), _fmt(e)])
    return path


def write_orders(rows: list[ConvergenceRow], outdir: Path) -> Path:
    """One row per refinement level; the last level has no order, unstable
    comparisons carry the cell text "unstable"."""
    path = outdir / "orders.csv"

    def cell(x, last=False):
        if last:
            return ""
        if x is None:
            return "unstable"
        return _fmt(x)

    fh, w = _writer(path)
    with fh:
        w.writerow(["level", "h_or_tau", "err_L1", "order_L1", "err_Linf", "order_Linf"])
        for row in rows:
            is_last = row.level == len(rows)
            w.writerow(
                [
                    str(row.level),
                    _fmt(row.h_or_tau),
                    cell(row.err_l1),
                    cell(row.order_l1, last=is_last),
                    cell(row.err_linf),
                    cell(row.order_linf, last=is_last),
                ]
            )
    return path


def write_run(result: RunResult, nodes, outdir: Path, entropy: bool, energy: bool) -> list[Path]:
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    written = [write_rate(result, outdir), write_mass(result, outdir)]
    if result.snapshots:
        written.append(write_snapshots(result, nodes, outdir))
    if entropy:
        written.append(write_entropy(result, outdir))
    if energy:
        written.append(write_energy(result, outdir))
    return written
