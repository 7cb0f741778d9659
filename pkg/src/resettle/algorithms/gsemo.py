"""GSEMO and its matrix-swap / repair variants.

All share one loop: uniform parent selection from a Pareto archive that
starts at the all-zero solution, one offspring per iteration, and the
archive update "drop everything the offspring weakly dominates, add it
unless something strictly dominates it".
"""
from __future__ import annotations

import numpy as np

from ..instance import Instance
from ..objective import Evaluator
from ..solution import (ObjectivePair, SwapMode, bitwise_mutation, matrix_swap_mutation,
                        repair)
from .base import Callback, RunState, SolverConfig, SolverResult, select_best_feasible


def _archive_loop(instance: Instance, evaluator: Evaluator, config: SolverConfig,
                  p_bitwise: float, use_repair: bool, callback: Callback | None) -> SolverResult:
    rng = np.random.default_rng(config.seed)
    run = RunState(instance, evaluator, config.budget)
    n = instance.n
    pop = [np.zeros(n, dtype=bool)]
    objs = [ObjectivePair(0.0, n)]
    iterations = 0
    while iterations < config.budget and not run.exhausted:
        iterations += 1
        parent = pop[int(rng.integers(len(pop)))]
        if p_bitwise >= 1.0 or rng.random() <= p_bitwise:
            child = bitwise_mutation(parent, rng)
        else:
            mode = SwapMode.ROWS if rng.random() < 0.5 else SwapMode.COLUMNS
            child = matrix_swap_mutation(instance, parent, rng, mode)
        if use_repair:
            child = repair(instance, child, rng)
        f1, f2 = obj = run.evaluate(child)
        dominated = False
        for g1, g2 in objs:
            if g1 >= f1 and g2 >= f2 and (g1 > f1 or g2 > f2):
                dominated = True
                break
        if not dominated:
            keep = [i for i, (g1, g2) in enumerate(objs) if not (f1 >= g1 and f2 >= g2)]
            pop = [pop[i] for i in keep] + [child]
            objs = [objs[i] for i in keep] + [obj]
        if callback is not None:
            callback(iterations, pop, objs)
    best = select_best_feasible(list(zip(pop, objs)))
    best_f = next(o[0] for b, o in zip(pop, objs) if b is best)
    return run.result(best, best_f, iterations=iterations, archive_size=len(pop),
                      archive=[(b.copy(), o) for b, o in zip(pop, objs)])


def gsemo(instance: Instance, evaluator: Evaluator, config: SolverConfig,
          callback: Callback | None = None) -> SolverResult:
    return _archive_loop(instance, evaluator, config, 1.0, False, callback)


def gsemo_sr(instance: Instance, evaluator: Evaluator, config: SolverConfig,
             callback: Callback | None = None) -> SolverResult:
    return _archive_loop(instance, evaluator, config, config.p_m, True, callback)


def gsemo_s(instance: Instance, evaluator: Evaluator, config: SolverConfig,
            callback: Callback | None = None) -> SolverResult:
    """Matrix-swap mutation without repair (ablation)."""
    return _archive_loop(instance, evaluator, config, config.p_m, False, callback)


def gsemo_r(instance: Instance, evaluator: Evaluator, config: SolverConfig,
            callback: Callback | None = None) -> SolverResult:
    """Bit-wise mutation followed by repair (ablation)."""
    return _archive_loop(instance, evaluator, config, 1.0, True, callback)
