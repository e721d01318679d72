"""Participatory-budgeting toolkit.

Generates synthetic PB instance families, solves instances exactly and
heuristically under welfare/representation-style objectives, ingests Pabulib
election files and evaluates arbitrary rules (including externally supplied
per-project scores) with normalized welfare/representation metrics.
"""

from .model import (
    Bundle,
    PBInstance,
    feasible,
    greedy_fill_from_scores,
    pav_score,
    representation,
    social_welfare,
)
from .rules import (
    Objective,
    OptimalResult,
    SolveLimitReached,
    TieReport,
    enumerate_optima,
    solve_exact,
    solve_random,
    solve_sequential,
)

__all__ = [
    "Bundle",
    "PBInstance",
    "feasible",
    "greedy_fill_from_scores",
    "pav_score",
    "representation",
    "social_welfare",
    "Objective",
    "OptimalResult",
    "SolveLimitReached",
    "TieReport",
    "enumerate_optima",
    "solve_exact",
    "solve_random",
    "solve_sequential",
]

__version__ = "0.1.0"
