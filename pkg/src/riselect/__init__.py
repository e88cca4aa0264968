"""Solvers for restricted items selection under interval cost uncertainty."""

from .model import (
    INFEASIBLE,
    ITERATION_LIMIT,
    OPTIMAL,
    TIME_LIMIT,
    CostInterval,
    ForbiddenPair,
    InfeasibleError,
    Instance,
    ItemRef,
    ItemSet,
    RegretReport,
    RobustResult,
    Scenario,
    Selection,
    ValidationReport,
    as_degenerate_instance,
    cost_of,
    evaluate_regret,
    instance_from_dict,
    instance_from_json,
    instance_to_dict,
    instance_to_json,
    is_feasible,
    make_instance,
    midpoint_scenario,
    sample_extreme_scenario,
    selection_from_dict,
    selection_from_json,
    selection_to_dict,
    selection_to_json,
    validate,
    worst_case_scenario,
)
from .deterministic import (
    CLIQUE_COMPONENTS,
    GENERAL,
    UNCONSTRAINED,
    RisSolution,
    StructureClass,
    brute_force_minmax_regret,
    brute_force_ris,
    classify,
    iter_feasible_selections,
    solve_bnb,
    solve_greedy,
    solve_ris,
)
from .flow import (
    Arc,
    FlowNetwork,
    FlowResult,
    build_network,
    min_cost_max_flow,
    network_to_dot,
    solve_via_flow,
)
from .regret import (
    Cut,
    CutSet,
    MasterSolution,
    SolverConfig,
    cut_objective_coefficients,
    minmax_regret,
    prune_cuts,
    solve_master,
)
from .heuristics import EvoParams, Population, crossover, evolve, initialize_cuts, mutate
from .reductions import (
    DnfReductionArtifacts,
    Graph,
    ItemRole,
    Literal,
    QuantifiedDnf,
    check_dnf,
    dnf_to_iris,
    exists_forall,
    independent_set_to_ris,
    parse_dnf,
    parse_graph,
)
from .generator import MODE_NORMAL, MODE_TRANSITIVE, GenParams, generate_instance
from .bench import BenchRow, format_table, rows_to_csv, run_benchmark

__version__ = "0.1.0"
