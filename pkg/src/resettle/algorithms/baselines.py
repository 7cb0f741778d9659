"""The additive (independent-employment matching) and greedy baselines."""
from __future__ import annotations

import numpy as np
from scipy.optimize import linear_sum_assignment

from ..instance import Instance
from ..objective import Evaluator
from .base import BudgetExhausted, RunState, SolverConfig, SolverResult


def max_weight_assignment(weights: np.ndarray, capacities: np.ndarray) -> np.ndarray:
    """Max-weight matching with migrant degree <= 1 and locality degree <= capacity.

    Each locality is expanded into ``cap`` identical slots, which turns the
    b-matching into a rectangular assignment problem.  Weights must be >= 0,
    so a maximum-cardinality optimum is also a maximum-weight one.
    """
    nv, nl = weights.shape
    chosen = np.zeros((nv, nl), dtype=bool)
    slot_loc = np.repeat(np.arange(nl), capacities)
    if slot_loc.size == 0:
        return chosen.reshape(-1)
    rows, cols = linear_sum_assignment(weights[:, slot_loc], maximize=True)
    chosen[rows, slot_loc[cols]] = True
    return chosen.reshape(-1)


def additive(instance: Instance, evaluator: Evaluator, config: SolverConfig) -> SolverResult:
    nv, nl = instance.n_migrants, instance.n_localities
    if config.budget < nv * nl:
        raise BudgetExhausted(f"additive needs {nv * nl} evaluations, budget is {config.budget}")
    run = RunState(instance, evaluator, config.budget)
    weights = np.empty((nv, nl))
    single = np.zeros(instance.n, dtype=bool)
    for k in range(instance.n):
        single[k] = True
        weights.flat[k] = max(run.estimate(single), 0.0)
        single[k] = False
    best = max_weight_assignment(weights, instance.capacities)
    total = float(weights.reshape(-1)[best].sum())
    run.trace = [(0, 0.0), (run.used, total)]
    return run.result(best, total, weights=weights)


def greedy(instance: Instance, evaluator: Evaluator, config: SolverConfig) -> SolverResult:
    run = RunState(instance, evaluator, config.budget)
    nv, nl = instance.n_migrants, instance.n_localities
    x = np.zeros(instance.n, dtype=bool)
    fx = 0.0
    assigned = np.zeros(nv, dtype=bool)
    spare = instance.capacities.astype(np.int64).copy()
    trace = [(0, 0.0)]
    while True:
        cand = [v * nl + l for v in np.flatnonzero(~assigned) for l in np.flatnonzero(spare > 0)]
        if not cand:
            break
        cand.sort()
        best_e, best_f = -1, -np.inf
        for e in cand:
            if run.exhausted:
                return _done(run, x, fx, trace, "budget")
            x[e] = True
            f = run.estimate(x)
            x[e] = False
            if f > best_f:
                best_e, best_f = e, f
        if best_f - fx <= 0:
            return _done(run, x, fx, trace, "no_gain")
        x[best_e] = True
        fx = best_f
        assigned[best_e // nl] = True
        spare[best_e % nl] -= 1
        trace.append((run.used, fx))
    return _done(run, x, fx, trace, "no_feasible_addition")


def _done(run: RunState, x, fx, trace, reason) -> SolverResult:
    res = run.result(x, fx, stop=reason)
    res.trace = trace
    return res
