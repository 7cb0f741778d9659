"""NSGA-II on the bi-objective reformulation, infeasible offspring discarded."""
from __future__ import annotations

import numpy as np

from ..instance import Instance
from ..objective import Evaluator
from ..solution import bitwise_mutation, is_feasible, one_point_crossover
from .base import Callback, RunState, SolverConfig, SolverResult, initial_population


def non_dominated_sort(objs: np.ndarray) -> np.ndarray:
    """Front index (0 = non-dominated) for each row of an (m, k) maximization matrix."""
    m = objs.shape[0]
    ge = np.all(objs[:, None, :] >= objs[None, :, :], axis=2)
    gt = np.any(objs[:, None, :] > objs[None, :, :], axis=2)
    dom = ge & gt  # dom[i, j]: i dominates j
    count = dom.sum(axis=0)
    rank = np.full(m, -1, dtype=np.int64)
    front = np.flatnonzero(count == 0)
    level = 0
    while front.size:
        rank[front] = level
        count = count - dom[front].sum(axis=0)
        count[rank >= 0] = -1
        front = np.flatnonzero(count == 0)
        level += 1
    return rank


def crowding_distance(objs: np.ndarray) -> np.ndarray:
    """Crowding distance within one front; boundary points get +inf."""
    m, k = objs.shape
    dist = np.zeros(m)
    if m <= 2:
        dist[:] = np.inf
        return dist
    for j in range(k):
        order = np.argsort(objs[:, j], kind="stable")
        col = objs[order, j]
        dist[order[0]] = dist[order[-1]] = np.inf
        span = col[-1] - col[0]
        if span > 0:
            dist[order[1:-1]] += (col[2:] - col[:-2]) / span
    return dist


def rank_and_crowding(objs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    rank = non_dominated_sort(objs)
    crowd = np.zeros(len(objs))
    for r in np.unique(rank):
        idx = np.flatnonzero(rank == r)
        crowd[idx] = crowding_distance(objs[idx])
    return rank, crowd


def environmental_selection(objs: np.ndarray, size: int) -> np.ndarray:
    """Indices of the ``size`` survivors: whole fronts first, then most crowded-apart."""
    rank, crowd = rank_and_crowding(objs)
    # lexsort: last key is primary
    order = np.lexsort((np.arange(len(objs)), -crowd, rank))
    return np.sort(order[:size])


def nsga2(instance: Instance, evaluator: Evaluator, config: SolverConfig,
          callback: Callback | None = None) -> SolverResult:
    rng = np.random.default_rng(config.seed)
    run = RunState(instance, evaluator, config.budget)
    size = config.resolved_population(instance)
    pop, objs = initial_population(instance, run, size, rng)
    cap = config.budget * config.offspring_cap_factor
    generated = generations = 0

    def tournament(rank, crowd):
        i, j = rng.integers(len(pop), size=2)
        if rank[i] != rank[j]:
            return i if rank[i] < rank[j] else j
        return i if crowd[i] >= crowd[j] else j

    while not run.exhausted and generated < cap:
        generations += 1
        rank, crowd = rank_and_crowding(np.asarray(objs, dtype=float))
        kids, kid_objs = [], []
        while len(kids) < size and not run.exhausted and generated < cap:
            a, b = pop[tournament(rank, crowd)], pop[tournament(rank, crowd)]
            if rng.random() < config.crossover_prob:
                pair = one_point_crossover(a, b, rng)
            else:
                pair = (a.copy(), b.copy())
            for child in pair:
                if rng.random() < config.mutation_prob:
                    child = bitwise_mutation(child, rng)
                generated += 1
                if not is_feasible(instance, child) or run.exhausted:
                    continue
                kids.append(child)
                kid_objs.append(run.evaluate(child))
        pop, objs = pop + kids, objs + kid_objs
        keep = environmental_selection(np.asarray(objs, dtype=float), size)
        pop = [pop[i] for i in keep]
        objs = [objs[i] for i in keep]
        if callback is not None:
            callback(generations, pop, objs)
    return run.result(generations=generations, generated=generated, population_size=size)
