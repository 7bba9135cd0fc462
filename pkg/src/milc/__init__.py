"""Persistent monitoring with UAV teams under a data-latency bound."""

from .errors import InfeasibleError, SimulationError
from .instance import (
    DistanceTable,
    GridSpec,
    ProblemInstance,
    all_pairs_shortest_paths,
    build_grid_instance,
    validate_instance,
)
from .matching import Assignment, matching_oracle, minmax_matching
from .mlp import Leg, MlpSchedule, MlpSolver, build_expanded_graph, min_latency, min_latency_path, mlp_oracle
from .planner import Plan, build_plan, plan_h1, plan_h2, plan_h3, required_uavs_min, required_uavs_saturation
from .scenario import Scenario, ScenarioError, load_scenario
from .simulator import SimulationReport, compute_idleness, simulate, verify_latency
from .tours import SubtourSet, Tour, k_splitour, shortcut, tsp_tour

__version__ = "0.1.0"
