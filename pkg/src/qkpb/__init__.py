"""Upper bounds for the quadratic knapsack problem by cutting planes and parametric convex relaxations."""

from .driver import POLICIES, TABLE_COLUMNS, CwicsConfig, Report, bound_only, cwics_run
from .errors import QkpbError
from .heuristic import round_to_feasible
from .instance import Instance, enumerate_optimum, generate_random, load, save
from .relax import build_relaxation, initial_perturbation, solve_cqp

__version__ = "0.1.0"

__all__ = [
    "POLICIES", "TABLE_COLUMNS", "CwicsConfig", "Report", "bound_only", "cwics_run", "QkpbError",
    "round_to_feasible", "Instance", "enumerate_optimum", "generate_random", "load", "save",
    "build_relaxation", "initial_perturbation", "solve_cqp",
]
