"""Solvers for migrant resettlement.

``solve`` dispatches on ``SolverConfig.algorithm``; every solver takes
(instance, evaluator, config) and returns a :class:`SolverResult` whose
``best`` is feasible and whose ``evaluations_used`` never exceeds the budget.
"""
from .base import (Algorithm, BudgetExhausted, RunState, SolverConfig, SolverResult,
                   select_best_feasible)
from .baselines import additive, greedy, max_weight_assignment
from .gsemo import gsemo, gsemo_r, gsemo_s, gsemo_sr
from .moead import moead
from .nsga2 import nsga2

SOLVERS = {
    Algorithm.ADDITIVE: additive,
    Algorithm.GREEDY: greedy,
    Algorithm.GSEMO: gsemo,
    Algorithm.GSEMO_SR: gsemo_sr,
    Algorithm.GSEMO_S: gsemo_s,
    Algorithm.GSEMO_R: gsemo_r,
    Algorithm.NSGA2_100: nsga2,
    Algorithm.NSGA2_2R: nsga2,
    Algorithm.MOEAD: moead,
}


def solve(instance, evaluator, config: SolverConfig) -> SolverResult:
    return SOLVERS[config.algorithm](instance, evaluator, config)


__all__ = [
    "Algorithm", "BudgetExhausted", "RunState", "SolverConfig", "SolverResult", "SOLVERS",
    "additive", "greedy", "gsemo", "gsemo_r", "gsemo_s", "gsemo_sr", "max_weight_assignment",
    "moead", "nsga2", "select_best_feasible", "solve",
]
