"""MOEA/D with normalized Tchebycheff decomposition."""
from __future__ import annotations

import numpy as np

from ..instance import Instance
from ..objective import Evaluator
from ..solution import bitwise_mutation, is_feasible, one_point_crossover
from .base import Callback, RunState, SolverConfig, SolverResult, initial_population


def uniform_weights(size: int) -> np.ndarray:
    """``size`` weight vectors evenly spaced on the 2-simplex, (0, 1) first."""
    t = np.linspace(0.0, 1.0, size)
    return np.column_stack((t, 1.0 - t))


def neighborhoods(weights: np.ndarray, t: int) -> np.ndarray:
    d = np.linalg.norm(weights[:, None, :] - weights[None, :, :], axis=2)
    return np.argsort(d, axis=1, kind="stable")[:, :t]


def tchebycheff(f: np.ndarray, weight: np.ndarray, ideal: np.ndarray, nadir: np.ndarray) -> np.ndarray:
    """Normalized Tchebycheff value (smaller is better) for maximization objectives.

    ``f`` may be a single objective vector or an (m, 2) stack.
    """
    span = ideal - nadir
    span = np.where(span > 0, span, 1.0)
    return np.max(weight * (ideal - f) / span, axis=-1)


def moead(instance: Instance, evaluator: Evaluator, config: SolverConfig,
          callback: Callback | None = None) -> SolverResult:
    rng = np.random.default_rng(config.seed)
    run = RunState(instance, evaluator, config.budget)
    size = config.resolved_population(instance)
    t = config.neighborhood_size
    if t > size:
        raise ValueError("neighborhood size exceeds population size")
    weights = uniform_weights(size)
    hood = neighborhoods(weights, t)

    pop, objs = initial_population(instance, run, size, rng)
    while len(pop) < size:  # budget ran out during initialization
        pop.append(pop[0])
        objs.append(objs[0])
    F = np.asarray(objs, dtype=float)
    ideal = F.max(axis=0)
    ideal_trace = [(run.used, tuple(ideal))]
    cap = config.budget * config.offspring_cap_factor
    generated = generations = 0

    while not run.exhausted and generated < cap:
        generations += 1
        for i in range(size):
            if run.exhausted or generated >= cap:
                break
            a, b = rng.choice(hood[i], size=2, replace=False)
            if rng.random() < config.crossover_prob:
                child = one_point_crossover(pop[a], pop[b], rng)[0]
            else:
                child = pop[a].copy()
            if rng.random() < config.mutation_prob:
                child = bitwise_mutation(child, rng)
            generated += 1
            if not is_feasible(instance, child):
                continue
            y = np.asarray(run.evaluate(child), dtype=float)
            if np.any(y > ideal):
                ideal = np.maximum(ideal, y)
                ideal_trace.append((run.used, tuple(ideal)))
            nadir = F.min(axis=0)
            js = hood[i]
            better = tchebycheff(y, weights[js], ideal, nadir) < tchebycheff(F[js], weights[js], ideal, nadir)
            for j in js[better]:
                pop[j] = child
                F[j] = y
        if callback is not None:
            callback(generations, pop, [tuple(r) for r in F])
    return run.result(generations=generations, generated=generated, ideal_trace=ideal_trace,
                      population_size=size)
