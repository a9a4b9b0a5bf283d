"""One-step density evolution with the flux-shifted Scharfetter-Gummel flux.

Interior interfaces carry the symmetrized drift-diffusion flux plus an
explicit shift term that removes the firing flux right of the reset node; the
two boundary interfaces carry exactly zero total flux, which makes every step
conservative by telescoping.  The semi-implicit stepper freezes the firing
rate and the Maxwellian weights at the current time and solves a tridiagonal
system for the new density, so no nonlinear solve is ever needed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_banded

from .grid import Grid, ModelParams, diffusion, heaviside_shift, sg_weights


class ClosureBreakdownError(ArithmeticError):
    """Firing-rate closure denominator 1 - a1*p/h dropped to zero or below."""


class NegativeDensityError(RuntimeError):
    """A step produced a negative interior density under the abort policy."""


@dataclass(frozen=True)
class StepConfig:
    tau: float
    scheme: str = "semi_implicit"
    negative_density_policy: str = "abort"  # or "warn"
    blowup_threshold: float = 1e3

    def __post_init__(self):
        if self.tau <= 0:
            raise ValueError(f"time step must be positive, got {self.tau}")
        if self.scheme not in ("explicit", "semi_implicit"):
            raise ValueError(f"unknown scheme {self.scheme!r}")
        if self.negative_density_policy not in ("abort", "warn"):
            raise ValueError(f"unknown policy {self.negative_density_policy!r}")


@dataclass(frozen=True)
class SolverState:
    """Node densities with Dirichlet ends, the current firing rate and time."""

    p: np.ndarray
    t: float
    n_rate: float


def firing_rate(p_last: float, grid: Grid, params: ModelParams) -> float:
    """Self-consistent firing rate from the one-sided slope at the firing end.

    Solves N = (a0 + a1*N) * p_{n-1}/h in closed form.  The relation is linear
    in N, so no iteration (and no iteration tolerance) is involved.
    """
    q = p_last / grid.h
    den = 1.0 - params.a1 * q
    if den <= 0:
        raise ClosureBreakdownError(
            f"firing-rate closure denominator {den} <= 0 (p/h = {q}); "
            "the rate-coupled diffusion no longer closes"
        )
    return params.a0 * q / den


def make_state(p: np.ndarray, t: float, grid: Grid, params: ModelParams) -> SolverState:
    """Build a consistent state: endpoints zeroed, rate read from p[n-1]."""
    p = np.asarray(p, dtype=float).copy()
    if p.shape != (grid.n + 1,):
        raise ValueError(f"density must have {grid.n + 1} nodes, got shape {p.shape}")
    p[0] = p[-1] = 0.0
    return SolverState(p=p, t=t, n_rate=firing_rate(p[-2], grid, params))


def cfl_ok(tau: float, grid: Grid, n_rate: float, params: ModelParams) -> bool:
    """Parabolic positivity bound tau/h^2 < 1/a(N).

    Diagnostic only, never enforced: the bound is sufficient for positivity of
    the semi-implicit step but far from sharp in practice.
    """
    return tau / grid.h**2 < 1.0 / diffusion(n_rate, params)


def _explicit_interface_flux(grid: Grid, reinj: float, outflux: float) -> np.ndarray:
    """Shift part of the flux at every interface (the part treated explicitly).

    Interface k = 0 carries zero total flux.  Interior interfaces carry
    -reinj * H(v_{k+1/2} - v_reset).  Interface n-1 carries the closed
    boundary flux outflux - reinj, which vanishes for the base model where the
    reinjected flux equals the outflux.
    """
    expl = -reinj * heaviside_shift(grid)
    expl[0] = 0.0
    expl[grid.n - 1] = outflux - reinj
    return expl


def _sg_interface_flux(p: np.ndarray, grid: Grid, n_rate: float, params: ModelParams) -> np.ndarray:
    """Symmetrized drift-diffusion flux per interface, zero at both boundaries."""
    a = diffusion(n_rate, params)
    wm, wp = sg_weights(grid, n_rate, params)
    flux = -(a / grid.h) * (wp * p[1:] - wm * p[:-1])
    flux[0] = 0.0
    flux[grid.n - 1] = 0.0
    return flux


def modified_flux(
    i_half: int,
    p_now: np.ndarray,
    p_next: np.ndarray,
    n_rate: float,
    grid: Grid,
    params: ModelParams,
) -> float:
    """Total flux at interface i_half + 1/2.

    The density ratio uses p_next while the Maxwellian weights and the shift
    term belong to the p_now era (rate n_rate); the explicit scheme passes
    p_next = p_now.  Both boundary interfaces return exactly zero.
    """
    n = grid.n
    if not 0 <= i_half <= n - 1:
        raise ValueError(f"interface index {i_half} outside [0, {n - 1}]")
    if i_half == 0 or i_half == n - 1:
        return 0.0
    a = diffusion(n_rate, params)
    wm, wp = sg_weights(grid, n_rate, params)
    sg = -(a / grid.h) * (wp[i_half] * p_next[i_half + 1] - wm[i_half] * p_next[i_half])
    return float(sg - n_rate * (i_half >= grid.l))


def _apply_policy(p_new: np.ndarray, cfg: StepConfig) -> None:
    if cfg.negative_density_policy == "abort" and np.any(p_new[1:-1] < 0):
        worst = float(p_new[1:-1].min())
        raise NegativeDensityError(f"negative interior density {worst:.3e} (policy abort)")


def explicit_step(state: SolverState, cfg: StepConfig, grid: Grid, params: ModelParams) -> SolverState:
    """Fully explicit update; subject to the parabolic stability restriction."""
    lam = cfg.tau / grid.h
    flux = _sg_interface_flux(state.p, grid, state.n_rate, params)
    flux += _explicit_interface_flux(grid, state.n_rate, state.n_rate)
    p_new = state.p.copy()
    p_new[1:-1] -= lam * (flux[1:] - flux[:-1])
    p_new[0] = p_new[-1] = 0.0
    _apply_policy(p_new, cfg)
    return SolverState(p=p_new, t=state.t + cfg.tau, n_rate=firing_rate(p_new[-2], grid, params))


def _semi_implicit_solve(
    p: np.ndarray,
    tau: float,
    weight_rate: float,
    reinj: float,
    outflux: float,
    grid: Grid,
    params: ModelParams,
) -> np.ndarray:
    """Solve (I + tau*L) p_new = p + shift with L frozen at weight_rate.

    Rows are strictly diagonally dominant (1 plus nonnegative off-diagonal
    mass), so the banded LU factorization is stable.  reinj lands on the
    right-hand side of the reset row; outflux leaves through the firing row.
    """
    n = grid.n
    a = diffusion(weight_rate, params)
    wm, wp = sg_weights(grid, weight_rate, params)
    wm = wm.copy()
    wp = wp.copy()
    wm[0] = wp[0] = 0.0  # boundary interfaces carry no implicit flux
    wm[n - 1] = wp[n - 1] = 0.0

    lam = tau / grid.h
    cond = tau * a / grid.h**2
    expl = _explicit_interface_flux(grid, reinj, outflux)
    rhs = p[1:n] - lam * (expl[1:] - expl[:-1])

    diag = 1.0 + cond * (wm[1:n] + wp[0 : n - 1])
    upper = -cond * wp[1:n]
    lower = -cond * wm[0 : n - 1]
    ab = np.zeros((3, n - 1))
    ab[0, 1:] = upper[:-1]
    ab[1, :] = diag
    ab[2, :-1] = lower[1:]

    p_new = np.zeros_like(p)
    p_new[1:n] = solve_banded((1, 1), ab, rhs)
    return p_new


def semi_implicit_step(state: SolverState, cfg: StepConfig, grid: Grid, params: ModelParams) -> SolverState:
    """Density-implicit update with rate and weights frozen at the current time.

    Conserves mass exactly up to the linear-solver roundoff and preserves
    positivity whenever tau/h^2 < 1/a(N).
    """
    p_new = _semi_implicit_solve(
        state.p, cfg.tau, state.n_rate, state.n_rate, state.n_rate, grid, params
    )
    _apply_policy(p_new, cfg)
    return SolverState(p=p_new, t=state.t + cfg.tau, n_rate=firing_rate(p_new[-2], grid, params))


def step(state: SolverState, cfg: StepConfig, grid: Grid, params: ModelParams) -> SolverState:
    if cfg.scheme == "explicit":
        return explicit_step(state, cfg, grid, params)
    return semi_implicit_step(state, cfg, grid, params)
