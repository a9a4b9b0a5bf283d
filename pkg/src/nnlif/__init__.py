"""Structure-preserving finite-volume solver for integrate-and-fire
Fokker-Planck dynamics with a firing flux reinjected at the reset potential."""

__version__ = "0.1.0"

from .grid import (
    Grid,
    ModelParams,
    NonpositiveDiffusionError,
    diffusion,
    drift,
    g_bound_ok,
    g_half,
    g_half_all,
    harmonic_mean,
    maxwellian,
)
from .solver import (
    ClosureBreakdownError,
    NegativeDensityError,
    SolverState,
    StepConfig,
    cfl_ok,
    explicit_step,
    firing_rate,
    make_state,
    modified_flux,
    semi_implicit_step,
)
from .stationary import (
    StationaryProfile,
    continuous_profile,
    discrete_stationary,
    find_stationary_rates,
    stationary_density,
)
from .diagnostics import (
    EntropyReport,
    discrete_energy,
    entropy_dissipation,
    relative_entropy,
    total_mass,
)
from .delay import (
    DelayRefractoryState,
    delay_steps,
    delayed_rate,
    make_variant_state,
    refractory_update,
    variant_step,
)
from .harness import (
    ConfigError,
    IcSpec,
    OscillationReport,
    OutputSpec,
    RunResult,
    ScenarioConfig,
    VariantSpec,
    convergence_order,
    gaussian_ic,
    load_config,
    oscillation_report,
    run_scenario,
    stationary_ic,
)

__all__ = [name for name in dir() if not name.startswith("_")]
