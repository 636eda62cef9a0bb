"""Moran process on undirected graphs: simulation, exact solves, bounds and FPRAS estimators."""

__version__ = "0.1.0"

from .graph import (
    Graph,
    GraphError,
    gen_clique,
    gen_cycle,
    gen_double_star,
    gen_path,
    gen_star,
    parse_edge_list,
    phi_prime_0,
    potential,
    q_value,
    total_fitness,
)
from .dynamics import (
    MutantState,
    Outcome,
    TrajectoryResult,
    empirical_drift,
    expected_drift,
    rng_stream,
    run_to_absorption,
    step,
)
from .exact import (
    BoundsReport,
    ExactResult,
    StateSpaceTooLarge,
    absorption_time_bound,
    bounds,
    clique_closed_form,
    fixation_exact,
    fixation_lower_bound,
    fixation_upper_bound,
)
from .estimator import EstimateReport, EstimatorPlan, Mode, estimate, hoeffding_error_bound, plan

__all__ = [name for name in dir() if not name.startswith("_")]
