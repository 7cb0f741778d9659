from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace
from typing import Any, Callable, Sequence

import numpy as np

from ..instance import Instance
from ..objective import Evaluator
from ..solution import ObjectivePair, is_feasible, random_feasible


class Algorithm(str, enum.Enum):
    ADDITIVE = "additive"
    GREEDY = "greedy"
    GSEMO = "gsemo"
    GSEMO_SR = "gsemo_sr"
    GSEMO_S = "gsemo_s"
    GSEMO_R = "gsemo_r"
    NSGA2_100 = "nsga2_100"
    NSGA2_2R = "nsga2_2r"
    MOEAD = "moead"

    @property
    def label(self) -> str:
        return _LABELS[self]


_LABELS = {
    Algorithm.ADDITIVE: "Additive",
    Algorithm.GREEDY: "Greedy",
    Algorithm.GSEMO: "MR-GSEMO",
    Algorithm.GSEMO_SR: "MR-GSEMO-SR",
    Algorithm.GSEMO_S: "MR-GSEMO-S",
    Algorithm.GSEMO_R: "MR-GSEMO-R",
    Algorithm.NSGA2_100: "MR-NSGA-II-100",
    Algorithm.NSGA2_2R: "MR-NSGA-II-2r",
    Algorithm.MOEAD: "MR-MOEA/D",
}


class BudgetExhausted(RuntimeError):
    pass


@dataclass(frozen=True)
class SolverConfig:
    algorithm: Algorithm
    budget: int
    seed: int = 0
    p_m: float = 0.5
    crossover_prob: float = 0.9
    mutation_prob: float = 1.0
    population_size: int | None = None
    neighborhood_size: int = 20
    # NSGA-II / MOEA/D discard infeasible offspring without charging the
    # budget; this caps generated offspring at budget * factor so runs end.
    offspring_cap_factor: int = 20

    def __post_init__(self):
        object.__setattr__(self, "algorithm", Algorithm(self.algorithm))
        if self.budget < 1:
            raise ValueError("budget must be at least 1")
        if not 0.0 <= self.p_m <= 1.0:
            raise ValueError("p_m must lie in [0, 1]")
        for name in ("crossover_prob", "mutation_prob"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1]")
        if self.population_size is not None and self.population_size < 2:
            raise ValueError("population_size must be at least 2")
        if self.neighborhood_size < 2:
            raise ValueError("neighborhood_size must be at least 2")

    def resolved_population(self, instance: Instance) -> int:
        if self.population_size is not None:
            return self.population_size
        if self.algorithm is Algorithm.NSGA2_2R:
            return 2 * (int(instance.capacities.sum()) + 1)
        return 100

    def with_seed(self, seed: int) -> "SolverConfig":
        return replace(self, seed=seed)


@dataclass
class SolverResult:
    best: np.ndarray
    best_f1_in_run: float
    evaluations_used: int
    trace: list[tuple[int, float]] = field(default_factory=list)
    info: dict[str, Any] = field(default_factory=dict)


Callback = Callable[[int, Sequence[np.ndarray], Sequence[ObjectivePair]], None]


def _better(f: float, bits: np.ndarray, best_f: float, best_bits: np.ndarray) -> bool:
    if f != best_f:
        return f > best_f
    nb, nbest = int(np.count_nonzero(bits)), int(np.count_nonzero(best_bits))
    if nb != nbest:
        return nb < nbest
    return bits.tobytes() < best_bits.tobytes()


def select_best_feasible(candidates: Sequence[tuple[np.ndarray, ObjectivePair]]) -> np.ndarray:
    """Largest f1 among feasible candidates; ties go to fewer pairs, then lexicographic order."""
    best_bits, best_f = None, None
    for bits, obj in candidates:
        if obj[0] < 0:
            continue
        if best_bits is None or _better(obj[0], bits, best_f, best_bits):
            best_bits, best_f = bits, obj[0]
    if best_bits is None:
        raise ValueError("no feasible candidate")
    return best_bits


class RunState:
    """Budgeted access to the evaluator plus best-so-far bookkeeping."""

    def __init__(self, instance: Instance, evaluator: Evaluator, budget: int):
        if evaluator.instance is not instance:
            raise ValueError("evaluator is bound to a different instance")
        self.instance = instance
        self.evaluator = evaluator
        self.budget = budget
        self.used = 0
        self.best_bits = np.zeros(instance.n, dtype=bool)
        self.best_f = 0.0
        self.trace: list[tuple[int, float]] = [(0, 0.0)]

    @property
    def exhausted(self) -> bool:
        return self.used >= self.budget

    def estimate(self, bits: np.ndarray) -> float:
        if self.exhausted:
            raise BudgetExhausted(f"evaluation budget of {self.budget} used up")
        self.used += 1
        return self.evaluator.estimate(bits)

    def evaluate(self, bits: np.ndarray) -> ObjectivePair:
        """Bi-objective value; infeasible solutions cost no evaluation."""
        zeros = int(bits.size - np.count_nonzero(bits))
        if not is_feasible(self.instance, bits):
            return ObjectivePair(-1.0, zeros)
        f = self.estimate(bits)
        self.offer(bits, f)
        return ObjectivePair(f, zeros)

    def offer(self, bits: np.ndarray, f: float):
        if _better(f, bits, self.best_f, self.best_bits):
            if f > self.best_f:
                self.trace.append((self.used, f))
            self.best_bits, self.best_f = bits.copy(), f

    def result(self, best: np.ndarray | None = None, best_f: float | None = None, **info) -> SolverResult:
        if best is None:
            best, best_f = self.best_bits, self.best_f
        return SolverResult(best.copy(), float(best_f), self.used, list(self.trace), info)


def initial_population(instance: Instance, run: RunState, size: int,
                       rng: np.random.Generator) -> tuple[list[np.ndarray], list[ObjectivePair]]:
    """All-zero solution plus random feasible ones, evaluated while budget lasts."""
    pop = [np.zeros(instance.n, dtype=bool)]
    objs = [ObjectivePair(0.0, instance.n)]
    while len(pop) < size and not run.exhausted:
        bits = random_feasible(instance, rng)
        pop.append(bits)
        objs.append(run.evaluate(bits))
    return pop, objs
