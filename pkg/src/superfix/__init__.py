"""Fixation probability tools for the generalized Moran process on
directed graphs, with a focus on the superstar family."""

from .engine import (
    AbsorptionOutcome,
    FixationEstimate,
    Outcome,
    run_event_driven,
    run_naive,
)
from .exactsolve import classic_moran, exact_fixation_full
from .experiments import (
    ExperimentGrid,
    GridCell,
    ResultRow,
    emit_plot_data,
    emit_table,
    estimate_fixation,
    run_grid,
)
from .fastlumped import run_superstar_fast
from .graphs import (
    DirectedGraph,
    SuperstarSpec,
    build_complete,
    build_star,
    build_superstar,
    validate_graph,
)
from .lumped import LumpedSuperstarState, run_lumped_superstar
from .restricted import (
    crossover_root,
    j_of_r,
    limit_h,
    solve_restricted,
    theorem_bound,
)
from .stats import ConfidenceInterval, agresti_coull

__version__ = "0.1.0"

__all__ = [
    "AbsorptionOutcome",
    "ConfidenceInterval",
    "DirectedGraph",
    "ExperimentGrid",
    "FixationEstimate",
    "GridCell",
    "LumpedSuperstarState",
    "Outcome",
    "ResultRow",
    "SuperstarSpec",
    "agresti_coull",
    "build_complete",
    "build_star",
    "build_superstar",
    "classic_moran",
    "crossover_root",
    "emit_plot_data",
    "emit_table",
    "estimate_fixation",
    "exact_fixation_full",
    "j_of_r",
    "limit_h",
    "run_event_driven",
    "run_grid",
    "run_lumped_superstar",
    "run_naive",
    "run_superstar_fast",
    "solve_restricted",
    "theorem_bound",
    "validate_graph",
]
