"""Stationary states: closed-form quadrature profile and the discrete recursion.

A stationary firing rate must make the closed-form density integrate to one.
The continuous flavor samples that closed form on the grid with composite
Gauss-Legendre quadrature; the discrete flavor rebuilds the profile from the
zero-residual interface-flux identity of the scheme itself, which is the
object the entropy dissipation theory talks about.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from numpy.polynomial.legendre import leggauss

from .grid import Grid, ModelParams, diffusion, g_half_all

TAIL_MASS_BOUND = 1e-8
_GL_ORDER = 10


@dataclass(frozen=True)
class StationaryProfile:
    n_inf: float
    p_inf: np.ndarray
    flavor: str  # "continuous-quadrature" or "discrete-recursion"


def stationary_density(n_inf: float, grid: Grid, params: ModelParams) -> np.ndarray:
    """Closed-form stationary density sampled at the grid nodes.

    p(v) = (N/a) exp(-(v-c)^2/(2a)) * integral over [max(v, v_reset), v_fire]
    of exp(+(w-c)^2/(2a)), with c the drift equilibrium b*N + v_ext.  The
    inner integral is accumulated cell by cell with 10-point Gauss-Legendre
    rules, far below 1e-10 absolute error per node for the smooth integrand.
    """
    a = diffusion(n_inf, params)
    c = params.b * n_inf + params.v_ext
    v = grid.nodes
    n, h, l = grid.n, grid.h, grid.l

    xg, wg = leggauss(_GL_ORDER)
    mids = 0.5 * (v[l:n] + v[l + 1 : n + 1])
    # quadrature abscissae per cell between the reset node and the firing end
    omega = mids[:, None] + 0.5 * h * xg[None, :]
    cells = 0.5 * h * np.exp((omega - c) ** 2 / (2.0 * a)) @ wg
    if not np.all(np.isfinite(cells)):
        raise FloatingPointError(
            "stationary quadrature overflowed; drift equilibrium too far from the domain"
        )

    inner = np.zeros(n + 1)
    inner[l:n] = np.cumsum(cells[::-1])[::-1]
    inner[:l] = inner[l]  # below the reset node the integral no longer depends on v
    p = (n_inf / a) * np.exp(-((v - c) ** 2) / (2.0 * a)) * inner

    if p[0] * 1.0 > TAIL_MASS_BOUND:
        # static message so repeated evaluations dedupe to one warning
        warnings.warn(
            "stationary density does not vanish at v_min; the domain truncation "
            "discards non-negligible tail mass",
            RuntimeWarning,
        )
    return p


def continuous_profile(n_inf: float, grid: Grid, params: ModelParams) -> StationaryProfile:
    return StationaryProfile(n_inf, stationary_density(n_inf, grid, params), "continuous-quadrature")


def _normalization_defect(n_inf: float, grid: Grid, params: ModelParams) -> float:
    p = stationary_density(n_inf, grid, params)
    return grid.h * float(np.sum(p[1:-1])) - 1.0


def find_stationary_rates(
    params: ModelParams,
    grid: Grid,
    n_max: float = 10.0,
    samples: int = 400,
) -> list[float]:
    """All stationary firing rates in (0, n_max] at which the profile has unit mass.

    Samples the normalization defect on a log-spaced grid, brackets sign
    changes and bisects each bracket down to |defect| < 1e-8.  An empty list
    is a valid outcome: strongly excitatory networks may have no stationary
    state at all.
    """
    if n_max <= 0:
        raise ValueError(f"n_max must be positive, got {n_max}")
    if samples < 2:
        raise ValueError(f"need at least 2 samples, got {samples}")
    rates = np.geomspace(n_max * 1e-4, n_max, samples)
    with warnings.catch_warnings():
        # the tail-mass warning is meaningless while probing off-root rates
        warnings.simplefilter("ignore", RuntimeWarning)
        defects = np.array([_normalization_defect(x, grid, params) for x in rates])

        roots = []
        for k in range(samples - 1):
            if defects[k] == 0.0:
                roots.append(float(rates[k]))
                continue
            if defects[k] * defects[k + 1] >= 0:
                continue
            lo, hi = float(rates[k]), float(rates[k + 1])
            f_lo = defects[k]
            mid = 0.5 * (lo + hi)
            for _ in range(200):
                mid = 0.5 * (lo + hi)
                f_mid = _normalization_defect(mid, grid, params)
                if abs(f_mid) < 1e-8:
                    break
                if f_lo * f_mid < 0:
                    hi = mid
                else:
                    lo, f_lo = mid, f_mid
            roots.append(mid)
        if defects[-1] == 0.0:
            roots.append(float(rates[-1]))
    return sorted(roots)


def discrete_stationary(
    n_inf: float,
    grid: Grid,
    params: ModelParams,
    allow_general: bool = False,
) -> StationaryProfile:
    """Discrete stationary profile built from the interface-flux identity.

    Seeds p[n-1] = h*N from the one-sided rate readout and walks the interior
    interfaces right to left so that every interior flux equals
    N * H(v_{k+1/2} - v_reset) exactly:

        p_i = ((1/h + g_{i+1/2}/2) p_{i+1} + N*H) / (1/h - g_{i+1/2}/2)

    Positive denominators require |g| < 2/h, which the harmonic-mean weights
    guarantee short of total underflow; the bound is checked anyway.  The
    construction is only backed by theory for the pure-leak constant-diffusion
    model, hence the guard on the coefficients.
    """
    if n_inf <= 0:
        raise ValueError(f"stationary rate must be positive, got {n_inf}")
    if not allow_general and (params.b != 0.0 or params.a1 != 0.0 or params.v_ext != 0.0):
        raise ValueError(
            "discrete recursion is only supported for b = 0, a1 = 0, v_ext = 0; "
            "pass allow_general=True to override"
        )
    n, h, l = grid.n, grid.h, grid.l
    g = g_half_all(grid, n_inf, params)
    if np.any(np.abs(g[1 : n - 1]) >= 2.0 / h):
        raise ValueError("interface drift bound |g| < 2/h violated; grid unresolvable")

    p = np.zeros(n + 1)
    p[n - 1] = h * n_inf
    for i in range(n - 2, 0, -1):
        shift = n_inf if i >= l else 0.0
        p[i] = ((1.0 / h + 0.5 * g[i]) * p[i + 1] + shift) / (1.0 / h - 0.5 * g[i])
    return StationaryProfile(n_inf, p, "discrete-recursion")
