"""Phase retrieval solvers with momentum, plus implicit-regularization
diagnostics and a reproducible experiment harness."""

from .diagnostics import (
    ConcentrationReport,
    LooBundle,
    concentration_report,
    loo_run,
    quadratic_oracle,
)
from .errors import (
    CapabilityError,
    DegenerateSpectrumError,
    DivergenceError,
    PowerIterationError,
)
from .model import (
    GroundTruth,
    Observations,
    SensingEnsemble,
    dist,
    ground_truth,
    observe,
    random_ground_truth,
    sample_ensemble,
    sample_unit_sphere,
)
from .objective import cost, gradient, hessian, hessian_extremes, hessian_vec
from .ric import (
    RicConfig,
    check_inc,
    check_loc,
    contraction_matrix_hb,
    contraction_matrix_nag,
    segment_in_ric,
    spectral_norm,
    spectral_radius,
)
from .solvers import (
    IterationTrace,
    Method,
    SolverParams,
    SolverState,
    Status,
    default_params,
    initial_state,
    run,
    step_gd,
    step_nesterov,
    step_polyak,
    theory_params,
)
from .spectral import SpectralReport, leading_eigenpair, random_init, spectral_init

__all__ = [
    "CapabilityError",
    "ConcentrationReport",
    "DegenerateSpectrumError",
    "DivergenceError",
    "GroundTruth",
    "IterationTrace",
    "LooBundle",
    "Method",
    "Observations",
    "PowerIterationError",
    "RicConfig",
    "SensingEnsemble",
    "SolverParams",
    "SolverState",
    "SpectralReport",
    "Status",
    "check_inc",
    "check_loc",
    "concentration_report",
    "contraction_matrix_hb",
    "contraction_matrix_nag",
    "cost",
    "default_params",
    "dist",
    "gradient",
    "ground_truth",
    "hessian",
    "hessian_extremes",
    "hessian_vec",
    "initial_state",
    "leading_eigenpair",
    "loo_run",
    "observe",
    "quadratic_oracle",
    "random_ground_truth",
    "random_init",
    "run",
    "sample_ensemble",
    "sample_unit_sphere",
    "segment_in_ric",
    "spectral_init",
    "spectral_norm",
    "spectral_radius",
    "step_gd",
    "step_nesterov",
    "step_polyak",
    "theory_params",
]
