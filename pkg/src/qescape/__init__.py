"""Exact propagation on the half-line with a Robin wall, and escape statistics."""
from .analysis import (
    DecayFit,
    ExperimentConfig,
    SurvivalSeries,
    fit_decay,
    load_config,
    parse_config,
    run_experiment,
    saturation_constant,
    table1_report,
)
from .errors import ConfigError, DomainError, QuadratureError
from .many_body import (
    NormalizationWarning,
    OrbitalSet,
    Statistics,
    survival_1,
    survival_2_grid,
    survival_N_overlap,
    symmetrized_kernel,
)
from .propagator import RobinParameter, k_dirichlet, k_free, k_neumann, k_robin
from .special import erfc, erfcx, wofz
from .spectral import k_spectral
from .state import EvolvedState, GaussianPacket, SpatialGrid, evolve, time_scales

__version__ = "0.1.0"
