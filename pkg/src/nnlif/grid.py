"""Uniform voltage grid and model-coefficient evaluations.

The density lives on nodes v_i = v_min + i*h of a uniform mesh over
[v_min, v_fire].  The reset potential must coincide with an interior node so
that the flux-shift (outflux at v_fire reinjected at v_reset) has an
unambiguous discrete location.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import expit


class NonpositiveDiffusionError(ValueError):
    """Diffusion coefficient a0 + a1*N dropped to zero or below."""


@dataclass(frozen=True)
class ModelParams:
    """Drift/diffusion coefficients: drift -v + b*N + v_ext, diffusion a0 + a1*N."""

    a0: float = 1.0
    a1: float = 0.0
    b: float = 0.0
    v_ext: float = 0.0

    def __post_init__(self):
        if self.a0 <= 0:
            raise NonpositiveDiffusionError(f"a0 must be positive, got {self.a0}")


@dataclass(frozen=True)
class Grid:
    """Uniform mesh on [v_min, v_fire] with the reset potential pinned to node l."""

    v_min: float
    v_reset: float
    v_fire: float
    n: int
    h: float = field(init=False)
    l: int = field(init=False)

    def __post_init__(self):
        if not self.v_min < self.v_reset < self.v_fire:
            raise ValueError(
                f"need v_min < v_reset < v_fire, got {self.v_min}, {self.v_reset}, {self.v_fire}"
            )
        if self.n < 2:
            raise ValueError(f"cell count must be at least 2, got {self.n}")
        h = (self.v_fire - self.v_min) / self.n
        ratio = (self.v_reset - self.v_min) / h
        l = round(ratio)
        if abs(ratio - l) > 1e-12 * max(1.0, abs(ratio)):
            raise ValueError(
                f"v_reset={self.v_reset} is not a grid node (offset {ratio - l:.3e} nodes); "
                "choose n so the reset potential lands on the mesh"
            )
        if not 0 < l < self.n:
            raise ValueError(f"reset node index {l} must be interior (0 < l < {self.n})")
        object.__setattr__(self, "h", h)
        object.__setattr__(self, "l", l)

    @property
    def nodes(self) -> np.ndarray:
        return self.v_min + self.h * np.arange(self.n + 1)

    @property
    def half_nodes(self) -> np.ndarray:
        """Interface coordinates v_{i+1/2}, i = 0..n-1."""
        return self.v_min + self.h * (np.arange(self.n) + 0.5)

    def refine(self, factor: int = 2) -> "Grid":
        """Same domain with factor-times more cells; the reset node is preserved."""
        return Grid(self.v_min, self.v_reset, self.v_fire, self.n * factor)


def drift(v, n_rate: float, params: ModelParams):
    """Drift field -v + b*N + v_ext."""
    return -v + params.b * n_rate + params.v_ext


def diffusion(n_rate: float, params: ModelParams) -> float:
    a = params.a0 + params.a1 * n_rate
    if a <= 0:
        raise NonpositiveDiffusionError(
            f"diffusion a0 + a1*N = {a} is nonpositive at N = {n_rate}"
        )
    return a


def maxwellian(v, n_rate: float, params: ModelParams):
    """Gaussian weight exp(-(v - b*N - v_ext)^2 / (2a)) centred at the drift equilibrium."""
    a = diffusion(n_rate, params)
    c = params.b * n_rate + params.v_ext
    return np.exp(-((v - c) ** 2) / (2.0 * a))


def harmonic_mean(m_left, m_right):
    """Harmonic mean of two positive weights; lies between min and max of the inputs."""
    if np.any(np.asarray(m_left) <= 0) or np.any(np.asarray(m_right) <= 0):
        raise ValueError("harmonic mean requires strictly positive inputs")
    return 2.0 * m_left * m_right / (m_left + m_right)


def interface_du(grid: Grid, n_rate: float, params: ModelParams) -> np.ndarray:
    """Increment of the log-Maxwellian exponent across each interface.

    Returns dU[k] = U(v_{k+1}) - U(v_k) with U(v) = (v - c)^2 / (2a), one value
    per interface k = 0..n-1.  Equal to h*(v_{k+1/2} - c)/a, so adjacent weight
    ratios M_{k+1}/M_k = exp(-dU[k]) never over- or underflow even when the
    Maxwellians themselves would.
    """
    a = diffusion(n_rate, params)
    c = params.b * n_rate + params.v_ext
    return grid.h * (grid.half_nodes - c) / a


def sg_weights(grid: Grid, n_rate: float, params: ModelParams):
    """Harmonic-mean interface weights relative to the adjacent nodes.

    Returns (w_minus, w_plus) with w_minus[k] = M^H_{k+1/2} / M_k and
    w_plus[k] = M^H_{k+1/2} / M_{k+1}, where M^H is the harmonic mean of the
    node Maxwellians.  Both lie in (0, 2); evaluated through the logistic of
    the exponent increment so extreme drift centres stay finite.
    """
    du = interface_du(grid, n_rate, params)
    return 2.0 * expit(-du), 2.0 * expit(du)


def g_half_all(grid: Grid, n_rate: float, params: ModelParams) -> np.ndarray:
    """Effective interface drift g_{k+1/2} = (2/h)(M_k - M_{k+1})/(M_k + M_{k+1}).

    Equals (2/h)*tanh(dU/2), a second-order approximation of the drift speed
    at the interface; strictly bounded by 2/h in magnitude.
    """
    du = interface_du(grid, n_rate, params)
    return (2.0 / grid.h) * np.tanh(0.5 * du)


def g_half(i: int, n_rate: float, grid: Grid, params: ModelParams) -> float:
    """Effective drift at interface i+1/2 for an interior interface (1 <= i <= n-2)."""
    if not 1 <= i <= grid.n - 2:
        raise ValueError(f"interface index {i} outside interior range [1, {grid.n - 2}]")
    return float(g_half_all(grid, n_rate, params)[i])


def g_bound_ok(grid: Grid, n_rate: float, params: ModelParams) -> bool:
    """True when |g_{k+1/2}| <= 2/h at every interior interface.

    The bound guarantees positivity of the discrete stationary recursion.  It
    holds automatically for harmonic-mean weights (|tanh| < 1) unless an
    adjacent-node weight ratio underflows entirely.
    """
    g = g_half_all(grid, n_rate, params)[1 : grid.n - 1]
    return bool(np.all(np.abs(g) <= 2.0 / grid.h))


def heaviside_shift(grid: Grid) -> np.ndarray:
    """Indicator H(v_{k+1/2} - v_reset) per interface; never evaluated at zero.

    Since the reset potential is a node, v_{k+1/2} - v_reset = (k - l + 1/2)*h
    is half-integer and the Heaviside argument cannot vanish.
    """
    return (np.arange(grid.n) >= grid.l).astype(float)
