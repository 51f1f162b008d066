from core.solver.data import bump_data, bump_difference, gaussian_bump
from core.solver.duhamel import ProductIntegrator, filon_moments, singular_moment
from core.solver.nonlinearity import Nonlinearity, evaluate_F
from core.solver.picard import (
    ContractionDiagnostics,
    LocalSolution,
    PicardSolver,
    RegularityTrace,
    TrajectorySolution,
    duhamel,
    local_weighted_sup,
    residual,
    solve_global,
    solve_local,
    with_forcing_exponent,
)
from core.solver.time_grid import TimeGrid

__all__ = [
    "ContractionDiagnostics",
    "LocalSolution",
    "Nonlinearity",
    "PicardSolver",
    "ProductIntegrator",
    "RegularityTrace",
    "TimeGrid",
    "TrajectorySolution",
    "bump_data",
    "bump_difference",
    "duhamel",
    "evaluate_F",
    "filon_moments",
    "gaussian_bump",
    "local_weighted_sup",
    "residual",
    "singular_moment",
    "solve_global",
    "solve_local",
    "with_forcing_exponent",
]
