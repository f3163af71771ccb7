"""Solver and numerical verifier for u'' + f(t, u, u') = 0 under three mixed
boundary conditions, built around projections onto the one-dimensional kernel
and cokernel, an explicit right inverse, a fixed-point iteration, and
sign-based degree bookkeeping with positivity certificates."""

from .numerics import (
    Grid,
    GridFunction,
    SampledDensity,
    make_grid,
    integrate,
    cumulative_integral,
    double_cumulative,
)
from .coincidence import (
    BoundaryCondition,
    CoincidenceFrame,
    KernelElement,
    NotInImageError,
    boundary_map,
    boundary_defect,
    kernel_embed,
    kernel_parameter,
    kernel_sup_factor,
    image_defect,
    project_P,
    project_Q,
    right_inverse_KP,
    iso_J,
)
from .nonlinearity import (
    CarathFn,
    ExtendedFn,
    NagumoPair,
    EvaluationError,
    ProbePlan,
    GrowthReport,
    extend_tilde,
    nemytskii,
    verify_growth_conditions,
)
from .solver import (
    DivergenceError,
    HomotopyParams,
    SolveOptions,
    SolveReport,
    phi_operator,
    residual,
    solve_fixed_point,
    continuation,
    default_initial,
    default_tolerance,
)
from .certification import (
    DegenerateEndpointError,
    NagumoBoundNotFound,
    PositivityCertificate,
    HypothesisReport,
    DegreeReport,
    CertificationOptions,
    kernel_h,
    kernel_interval_halfwidth,
    brouwer_degree_1d,
    nagumo_bound,
    check_positivity,
    zero_propagation_margin,
    check_Hr,
    check_HR,
    degree_report,
)
from .corpus import (
    ProblemSpec,
    NoBracketError,
    logistic_family,
    allee_family,
    manufactured_problem,
    get_problem,
    problem_names,
    oracle_shoot,
)

__version__ = "0.1.0"
