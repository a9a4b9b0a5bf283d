"""Delayed-rate drift/diffusion with a refractory reservoir.

The density step is the same semi-implicit solve as the base model, except
that (i) the Maxwellian weights and the diffusion are built from the rate
recorded one delay ago, (ii) the reinjected flux at the reset node carries the
refractory release r/gamma instead of the firing rate, and (iii) the firing
boundary still ejects the current rate.  The reservoir itself advances by
forward Euler, which is exactly what makes the combined mass p + r telescope
to a constant; backward Euler would not.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Deque, Iterable

import numpy as np

from .grid import Grid, ModelParams, diffusion
from .solver import SolverState, StepConfig, _apply_policy, _semi_implicit_solve, firing_rate


@dataclass
class DelayRefractoryState:
    """Density state plus refractory mass and the bounded firing-rate history.

    The history holds the last round(d/tau) rates, oldest first, excluding the
    current one; the rate recorded d time units ago is therefore history[0].
    """

    base: SolverState
    r: float
    history: Deque[float]
    d: float
    gamma: float


def delay_steps(d: float, tau: float, adjust: bool = False) -> tuple[int, float]:
    """Number of steps spanning the delay, optionally adjusting tau downward.

    d/tau must be an integer (to 1e-12 relative) so the delayed lookup needs
    no interpolation; with adjust=True, tau is shrunk to d/ceil(d/tau).
    """
    if d < 0:
        raise ValueError(f"delay must be nonnegative, got {d}")
    if tau <= 0:
        raise ValueError(f"time step must be positive, got {tau}")
    if d == 0.0:
        return 0, tau
    ratio = d / tau
    k = round(ratio)
    if abs(ratio - k) <= 1e-12 * max(1.0, ratio) and k > 0:
        return k, tau
    if not adjust:
        raise ValueError(f"delay {d} is not an integer multiple of tau {tau}")
    k = int(np.ceil(ratio))
    return k, d / k


def make_variant_state(
    p: np.ndarray,
    t: float,
    grid: Grid,
    params: ModelParams,
    d: float,
    gamma: float,
    r0: float,
    tau: float,
    prehistory: float | Iterable[float] | None = None,
) -> DelayRefractoryState:
    """Initial variant state with the history buffer filled.

    By default the whole buffer is seeded with the initial rate so the delayed
    lookup is continuous at t = 0; pass a scalar (e.g. 0.0) or an explicit
    sequence of round(d/tau) rates to override.
    """
    if gamma <= 0:
        raise ValueError(f"refractory period must be positive, got {gamma}")
    if r0 < 0:
        raise ValueError(f"refractory mass must be nonnegative, got {r0}")
    k, _ = delay_steps(d, tau)
    p = np.asarray(p, dtype=float).copy()
    p[0] = p[-1] = 0.0
    n0 = firing_rate(p[-2], grid, params)
    base = SolverState(p=p, t=t, n_rate=n0)
    if prehistory is None:
        hist = deque([n0] * k, maxlen=k)
    elif np.isscalar(prehistory):
        hist = deque([float(prehistory)] * k, maxlen=k)
    else:
        values = [float(x) for x in prehistory]
        if len(values) != k:
            raise ValueError(f"prehistory must supply {k} rates, got {len(values)}")
        hist = deque(values, maxlen=k)
    return DelayRefractoryState(base=base, r=float(r0), history=hist, d=d, gamma=gamma)


def delayed_rate(state: DelayRefractoryState) -> float:
    """Rate recorded one delay ago; the current rate when the delay is zero."""
    if len(state.history) == 0:
        return state.base.n_rate
    return state.history[0]


def refractory_update(r: float, n_rate: float, gamma: float, tau: float) -> float:
    """Forward-Euler reservoir update r + tau*(N - r/gamma)."""
    if gamma <= 0:
        raise ValueError(f"refractory period must be positive, got {gamma}")
    return r + tau * (n_rate - r / gamma)


def variant_step(
    state: DelayRefractoryState,
    cfg: StepConfig,
    grid: Grid,
    params: ModelParams,
) -> DelayRefractoryState:
    """One semi-implicit step of the delayed/refractory dynamics.

    The reset row receives tau/h * r/gamma (refractory release, not the firing
    rate: the one deliberate divergence from the base scheme) while the firing
    row ejects tau/h * N with the current, undelayed rate, as the combined
    mass identity requires.  The new rate is read from the new density with
    the diffusion frozen at the step's delayed rate.
    """
    n_delayed = delayed_rate(state)
    n_now = state.base.n_rate
    p_new = _semi_implicit_solve(
        state.base.p,
        cfg.tau,
        n_delayed,  # Maxwellian weights and diffusion from the delayed rate
        state.r / state.gamma,
        n_now,
        grid,
        params,
    )
    _apply_policy(p_new, cfg)
    r_new = refractory_update(state.r, n_now, state.gamma, cfg.tau)
    n_new = diffusion(n_delayed, params) * p_new[-2] / grid.h

    # appending to a maxlen=k deque evicts the rate that just left the window;
    # with a zero delay the buffer has maxlen 0 and stays empty
    history = deque(state.history, maxlen=state.history.maxlen)
    history.append(n_now)
    new_base = SolverState(p=p_new, t=state.base.t + cfg.tau, n_rate=float(n_new))
    return DelayRefractoryState(
        base=new_base, r=r_new, history=history, d=state.d, gamma=state.gamma
    )
