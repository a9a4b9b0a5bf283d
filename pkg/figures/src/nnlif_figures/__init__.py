"""Post-processing gallery for solver CSV outputs."""

__version__ = "0.1.0"

from .render import KINDS, FigureInputError, FigureSpec, build, load_table, render

__all__ = ["KINDS", "FigureInputError", "FigureSpec", "build", "load_table", "render"]
