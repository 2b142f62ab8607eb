"""Numerical lab for the fractal Burgers equation u_t + A(u)_x = eps D^{alpha/2} u."""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    BoundaryProximityError,
    ConfigurationError,
    ConvergenceError,
    DegenerateInputError,
    DomainError,
    FractalBurgersError,
    FractalBurgersWarning,
    IntegrationError,
    PropertyViolation,
    ShapeError,
)
from .fractional_operator import (  # noqa: E402
    FarField,
    FracLapOperator,
    Grid1D,
    apply,
    build_operator,
    dirichlet_form_positive_part,
    normalization_constant,
)
from .solver import BURGERS, FluxSpec, SolverConfig, State, burgers_flux, power_flux, solve, stable_timestep, step  # noqa: E402
from .profiles import (  # noqa: E402
    InviscidShock,
    ViscousProfile,
    compute_profile,
    evaluate_scaled,
    rankine_hugoniot_speed,
    tail_gap,
)
from .entropy import (  # noqa: E402
    EntropyPair,
    LambdaBounds,
    entropy_pair,
    estimate_lambda,
    normalized_flux,
    relative_entropy,
    relative_entropy_flux,
    relative_flux,
)
from .shift import ShiftState, shift_rhs  # noqa: E402
from .diagnostics import (  # noqa: E402
    CutoffFamily,
    E_value,
    EntropyLedger,
    RateReport,
    cutoff_eval,
    decompose_dHdt,
    psi_value,
    rate_fit,
    shifted_l2_distance,
    weighted_relative_entropy,
)
from .config import ExperimentConfig, load_config  # noqa: E402
from .harness import cmd_check, cmd_profile, cmd_rate, cmd_solve, cmd_sweep, get_profile, run_coupled  # noqa: E402
