"""Render solver CSV outputs into the standard figure gallery.

Four figure kinds cover the usual views: the firing-rate trace, overlaid
density snapshots, the relative-entropy decay, and a bird's-eye rate panel
with a zoomed tail window.  Rendering is read-only over the CSV inputs and
deterministic: identical inputs produce identical images.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import pandas as pd

KINDS = ("rate_trace", "density_snapshots", "entropy_trace", "rate_birdview")

REQUIRED_COLUMNS = {
    "rate_trace": ("t", "N"),
    "density_snapshots": ("t", "v", "p"),
    "entropy_trace": ("t", "S"),
    "rate_birdview": ("t", "N"),
}


class FigureInputError(ValueError):
    """Missing file, missing column or empty series, named explicitly."""


@dataclass(frozen=True)
class FigureSpec:
    kind: str
    input: Path
    out: Path
    title: str = ""
    xlabel: str = ""
    ylabel: str = ""
    zoom_start: float = 0.8  # birdview zoom window: fraction of the time span

    def __post_init__(self):
        if self.kind not in KINDS:
            raise FigureInputError(f"unknown figure kind {self.kind!r}; expected one of {KINDS}")


def load_table(path: Path, kind: str) -> pd.DataFrame:
    path = Path(path)
    if not path.exists():
        raise FigureInputError(f"{path}: file not found")
    frame = pd.read_csv(path)
    for column in REQUIRED_COLUMNS[kind]:
        if column not in frame.columns:
            raise FigureInputError(f"{path}: missing column {column!r}")
    if len(frame) == 0:
        raise FigureInputError(f"{path}: no data rows")
    return frame


def _labels(ax, spec: FigureSpec, default_x: str, default_y: str):
    ax.set_xlabel(spec.xlabel or default_x)
    ax.set_ylabel(spec.ylabel or default_y)
    if spec.title:
        ax.set_title(spec.title)


def _build_rate_trace(spec: FigureSpec):
    frame = load_table(spec.input, "rate_trace")
    fig, ax = plt.subplots(figsize=(7.0, 4.0), constrained_layout=True)
    ax.plot(frame["t"], frame["N"], lw=1.2)
    _labels(ax, spec, "t", "firing rate N(t)")
    return fig


def _build_density_snapshots(spec: FigureSpec):
    frame = load_table(spec.input, "density_snapshots")
    fig, ax = plt.subplots(figsize=(7.0, 4.0), constrained_layout=True)
    for t_value, block in frame.groupby("t", sort=True):
        ax.plot(block["v"], block["p"], lw=1.2, label=f"t = {t_value:g}")
    ax.legend()
    _labels(ax, spec, "v", "density p(v)")
    return fig


def _build_entropy_trace(spec: FigureSpec):
    frame = load_table(spec.input, "entropy_trace")
    fig, ax = plt.subplots(figsize=(7.0, 4.0), constrained_layout=True)
    ax.plot(frame["t"], frame["S"], lw=1.2)
    _labels(ax, spec, "t", "relative entropy S(t)")
    return fig


def _build_rate_birdview(spec: FigureSpec):
    """Full rate history on top, a zoomed tail window below."""
    frame = load_table(spec.input, "rate_birdview")
    fig, (top, bottom) = plt.subplots(2, 1, figsize=(7.0, 8.0), constrained_layout=True)
    t, n = frame["t"], frame["N"]
    top.plot(t, n, lw=0.8)
    _labels(top, spec, "t", "firing rate N(t)")

    t0, t1 = float(t.iloc[0]), float(t.iloc[-1])
    zoom_from = t0 + max(0.0, min(spec.zoom_start, 1.0)) * (t1 - t0)
    window = frame[frame["t"] >= zoom_from]
    if len(window) < 2:
        window = frame
    bottom.plot(window["t"], window["N"], lw=1.2)
    bottom.set_xlabel("t (zoom)")
    bottom.set_ylabel("N(t)")
    return fig


_BUILDERS = {
    "rate_trace": _build_rate_trace,
    "density_snapshots": _build_density_snapshots,
    "entropy_trace": _build_entropy_trace,
    "rate_birdview": _build_rate_birdview,
}


def build(spec: FigureSpec):
    """Build the matplotlib figure without writing it (useful for inspection)."""
    return _BUILDERS[spec.kind](spec)


def render(spec: FigureSpec) -> Path:
    """Render one figure; returns the written image path."""
    fig = build(spec)
    out = Path(spec.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(out, dpi=120, metadata={"Software": "nnlif-figures"})
    plt.close(fig)
    return out
