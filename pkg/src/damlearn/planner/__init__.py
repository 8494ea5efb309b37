"""Grounded forward-search planning with clause preconditions and
conditional effects, plus an external-planner adapter."""

from .external import (ExternalFailure, default_external_command,
                       external_available, ground_task_to_pddl, run_external,
                       solve_external)
from .grounding import GroundedProblem, ground_problem
from .heuristic import AdditiveHeuristic
from .search import (PlannerConfig, PlanningError, ResourceExhausted,
                     Unsolvable, breadth_first_search,
                     greedy_best_first_search, solve)
from .task import (Effect, GroundTask, Operator, Plan, Violation,
                   is_valid_plan, validate_plan)

__all__ = [
    "ExternalFailure", "default_external_command", "external_available",
    "ground_task_to_pddl", "run_external", "solve_external", "GroundedProblem",
    "ground_problem", "AdditiveHeuristic", "PlannerConfig", "PlanningError",
    "ResourceExhausted", "Unsolvable", "breadth_first_search",
    "greedy_best_first_search", "solve", "Effect", "GroundTask", "Operator",
    "Plan", "Violation", "is_valid_plan", "validate_plan",
]
