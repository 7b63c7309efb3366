"""Economic dispatch, stranded-power metrics and stochastic placement of
dispatchable data-center loads on DC power-flow networks."""

from .dispatch import DispatchInputs, DispatchSolution, build_ed, dispatch_cost, solve_ed
from .metrics import MetricReport, achieved_capacity, ensemble_stats, metric_report
from .network import Network, NetworkError, incidence, load_network, validate_network
from .placement import (PlacementConfig, PlacementSolution, build_deterministic_equivalent, evaluate_placement,
                        recourse, solve_benders, solve_deterministic_equivalent)
from .scenario import ScenarioSet, load_scenarios, normalize_probabilities, scale_to_penetration

__version__ = "0.1.0"

__all__ = [
    "DispatchInputs", "DispatchSolution", "MetricReport", "Network", "NetworkError", "PlacementConfig",
    "PlacementSolution", "ScenarioSet", "achieved_capacity", "build_deterministic_equivalent", "build_ed",
    "dispatch_cost", "ensemble_stats", "evaluate_placement", "incidence", "load_network", "load_scenarios",
    "metric_report", "normalize_probabilities", "recourse", "scale_to_penetration", "solve_benders",
    "solve_deterministic_equivalent", "solve_ed", "validate_network",
]
