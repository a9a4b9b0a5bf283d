"""Run-time observables: mass, relative entropy with its dissipation split,
and the log-based energy functional.

The relative entropy S = sum_i h*G(p_i/p_i_inf)*p_i_inf with quadratic
G(x) = (x-1)^2/2 is the quantity with a decay guarantee for the pure-leak
model; its dissipation splits into a bulk term (nonpositive whenever the
interface drift bound holds) and a flux-shift boundary term (a negative
multiple of a perfect square, nonpositive always).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .grid import Grid, ModelParams, g_half_all, maxwellian
from .stationary import StationaryProfile


@dataclass(frozen=True)
class EntropyReport:
    s: float
    bulk: float
    boundary: float
    t: float


def total_mass(p: np.ndarray, grid: Grid, r: float = 0.0) -> float:
    """Discrete mass h * sum of interior densities, plus refractory mass if any."""
    return grid.h * float(np.sum(p[1 : grid.n])) + r


def _quadratic_g(x: np.ndarray) -> np.ndarray:
    return 0.5 * (x - 1.0) ** 2


def relative_entropy(
    p: np.ndarray,
    p_inf: StationaryProfile,
    grid: Grid,
    g: Callable[[np.ndarray], np.ndarray] | None = None,
) -> float:
    """Convex distance to a stationary profile.

    The quadratic default is the only choice with a decay guarantee; any other
    convex g is accepted for exploration.
    """
    ref = p_inf.p_inf[1 : grid.n]
    if np.any(ref <= 0):
        raise ValueError("stationary profile must be strictly positive at interior nodes")
    gfun = g if g is not None else _quadratic_g
    ratio = p[1 : grid.n] / ref
    return grid.h * float(np.sum(gfun(ratio) * ref))


def entropy_dissipation(
    p: np.ndarray,
    p_inf: StationaryProfile,
    n_rate: float,
    grid: Grid,
    params: ModelParams,
    t: float = 0.0,
) -> EntropyReport:
    """Bulk and flux-shift dissipation of the quadratic relative entropy.

    bulk = sum over interior interfaces of (r_{i+1} - r_i)^2 *
           [(-1/(2h) - g/4) p_{i+1}_inf + (-1/(2h) + g/4) p_i_inf],
    boundary = -(N_inf/2) (r_l - N/N_inf)^2,
    with r_i = p_i / p_i_inf.  Their sum approximates dS/dt when the reference
    is the discrete-recursion profile.
    """
    n, h, l = grid.n, grid.h, grid.l
    ref = p_inf.p_inf
    if np.any(ref[1:n] <= 0):
        raise ValueError("stationary profile must be strictly positive at interior nodes")
    ratio = np.zeros(n + 1)
    ratio[1:n] = p[1:n] / ref[1:n]

    g = g_half_all(grid, p_inf.n_inf, params)
    dr = ratio[2:n] - ratio[1 : n - 1]  # jumps across interfaces 1+1/2 .. (n-2)+1/2
    bracket = (-1.0 / (2.0 * h) - g[1 : n - 1] / 4.0) * ref[2:n] + (
        -1.0 / (2.0 * h) + g[1 : n - 1] / 4.0
    ) * ref[1 : n - 1]
    bulk = float(np.sum(dr * dr * bracket))
    boundary = -0.5 * p_inf.n_inf * (ratio[l] - n_rate / p_inf.n_inf) ** 2
    s = relative_entropy(p, p_inf, grid)
    return EntropyReport(s=s, bulk=bulk, boundary=float(boundary), t=t)


def discrete_energy(
    ts: Sequence[float],
    ps: Sequence[np.ndarray],
    rates: Sequence[float],
    c_bound: float,
    grid: Grid,
    params: ModelParams,
) -> float:
    """Log energy at the latest stored time.

    E(t) = sum_i p_i log(p_i / M_i) h - c_bound * (G_l(t) - G_{n-1}(t)) where
    G_i accumulates the time integral of log(p_i / M_i), here by the
    trapezoidal rule over the stored snapshots.  All stored densities must be
    strictly positive at interior nodes.  c_bound stands in for an a-priori
    rate bound that cannot be verified in advance, so this is a report, not a
    certificate.
    """
    if len(ts) != len(ps) or len(ts) != len(rates):
        raise ValueError("ts, ps and rates must have equal length")
    if not ts:
        raise ValueError("need at least one stored snapshot")
    n, h, l = grid.n, grid.h, grid.l
    v = grid.nodes

    log_l = np.empty(len(ts))
    log_last = np.empty(len(ts))
    for k, (p, rate) in enumerate(zip(ps, rates)):
        if np.any(p[1:n] <= 0):
            raise ValueError(f"snapshot {k} has nonpositive interior density")
        m = maxwellian(v, rate, params)
        log_l[k] = np.log(p[l] / m[l])
        log_last[k] = np.log(p[n - 1] / m[n - 1])

    p_now = ps[-1]
    m_now = maxwellian(v, rates[-1], params)
    first = h * float(np.sum(p_now[1:n] * np.log(p_now[1:n] / m_now[1:n])))

    dt = np.diff(np.asarray(ts, dtype=float))
    g_l = float(np.sum(0.5 * (log_l[1:] + log_l[:-1]) * dt))
    g_last = float(np.sum(0.5 * (log_last[1:] + log_last[:-1]) * dt))
    return first - c_bound * (g_l - g_last)
