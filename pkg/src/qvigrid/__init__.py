"""Grid solvers for fully nonlinear obstacle problems and impulse-control
quasi-variational inequalities, with free-boundary regularity probes."""

__version__ = "0.1.0"

from .grid import (
    Grid,
    GridFunction,
    NodeSet,
    build_grid,
    distance_to_set,
    nearest_in_set,
    refine,
)
from .intervention import (
    CostFunction,
    SeparationResult,
    argmin_set,
    cone_min,
    intervention_operator,
    separation_delta,
)
from .operators import (
    BELLMAN_MAX,
    BELLMAN_MIN,
    LAPLACE,
    PUCCI_MINUS,
    PUCCI_PLUS,
    ObstacleSide,
    OperatorSpec,
    apply_operator,
    complementarity_residual,
    discrete_hessian,
    dual,
    evaluate,
)
from .penalty import (
    DecayReport,
    MollifiedObstacle,
    PenaltyFamily,
    beta,
    epsilon_sweep,
    fit_decay,
    mollify_obstacle,
    solve_penalized,
)
from .presets import PRESETS, preset
from .probe import (
    ContactSet,
    HessianField,
    ModulusFamily,
    ProbeReport,
    contact_oscillation,
    extract_contact_set,
    growth_constant,
    holder_seminorm,
    second_increment,
    semiconcavity_modulus,
)
from .qvi import QVICheck, QVIProblem, QVIReport, check_qvi, qvi_residual, solve_qvi
from .solve import (
    ObstacleProblem,
    SolveReport,
    default_tol,
    solve_obstacle,
    solve_unconstrained,
)

__all__ = [
    "__version__",
    "Grid", "GridFunction", "NodeSet", "build_grid", "refine",
    "distance_to_set", "nearest_in_set",
    "OperatorSpec", "ObstacleSide", "LAPLACE", "PUCCI_PLUS", "PUCCI_MINUS",
    "BELLMAN_MIN", "BELLMAN_MAX", "dual", "evaluate", "apply_operator",
    "discrete_hessian", "complementarity_residual",
    "ObstacleProblem", "SolveReport", "default_tol", "solve_obstacle",
    "solve_unconstrained",
    "CostFunction", "SeparationResult", "cone_min", "intervention_operator",
    "argmin_set", "separation_delta",
    "QVIProblem", "QVIReport", "QVICheck", "solve_qvi", "qvi_residual",
    "check_qvi",
    "PenaltyFamily", "MollifiedObstacle", "DecayReport", "beta",
    "mollify_obstacle", "solve_penalized", "epsilon_sweep", "fit_decay",
    "ModulusFamily", "ProbeReport", "ContactSet", "HessianField",
    "second_increment", "extract_contact_set", "growth_constant",
    "contact_oscillation", "semiconcavity_modulus", "holder_seminorm",
    "PRESETS", "preset",
]
