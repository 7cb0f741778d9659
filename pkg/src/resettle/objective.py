"""Objective evaluation for the interview and coordination models.

Monte-Carlo estimation runs through compiled kernels; the exact oracle
is plain Python enumeration and is deliberately kept independent of them.
"""
from __future__ import annotations

import itertools
import math
from functools import cached_property

import numpy as np

from . import _kernels
from .instance import Instance, Model
from .matching import BipartiteGraph, max_bipartite_matching
from .solution import ObjectivePair, is_feasible

INTERVIEW_GROUP_LIMIT = 8
COORDINATION_FREE_EDGE_LIMIT = 20


class OracleLimitExceeded(RuntimeError):
    """The exact oracle would need more enumeration than allowed."""


class InfeasibleAssignment(ValueError):
    pass


class _Compiled:
    """Per-instance arrays consumed by the kernels."""

    def __init__(self, instance: Instance):
        self.instance = instance
        self.n_loc = instance.n_localities
        self.n_prof = instance.num_professions
        self.professions = np.ascontiguousarray(instance.professions)
        self.probs = np.ascontiguousarray(instance.probs)
        self.jobs_flat = np.ascontiguousarray(instance.jobs.reshape(-1))
        if instance.model is Model.COORDINATION:
            self._build_coordination_templates()

    def _build_coordination_templates(self):
        inst = self.instance
        slot_base = np.concatenate(([0], np.cumsum(inst.jobs.sum(axis=1))))
        self.n_slots = int(slot_base[-1])
        ptr = [0]
        slots, ps = [], []
        for v in range(inst.n_migrants):
            for l in range(inst.n_localities):
                s = int(slot_base[l])
                for pi in range(inst.num_professions):
                    c = int(inst.jobs[l, pi])
                    p = float(inst.probs[v, pi])
                    if p > 0.0:
                        slots.extend(range(s, s + c))
                        ps.extend([p] * c)
                    s += c
                ptr.append(len(slots))
        self.pair_ptr = np.asarray(ptr, dtype=np.int64)
        self.pair_slots = np.asarray(slots, dtype=np.int64)
        self.pair_p = np.asarray(ps, dtype=np.float64)

    def totals(self, sel: np.ndarray, samples: int, key: np.uint64, call: int) -> np.ndarray:
        # fixed argument types keep numba on a single compiled specialization
        call = np.int64(call)
        if self.instance.model is Model.INTERVIEW:
            return _kernels.interview_totals(sel, self.n_loc, self.professions, self.n_prof,
                                             self.probs, self.jobs_flat, samples, key, call)
        return _kernels.coordination_totals(sel, self.pair_ptr, self.pair_slots, self.pair_p,
                                            self.n_slots, samples, key, call)


_COMPILED_CACHE: dict[int, _Compiled] = {}


def _compiled(instance: Instance) -> _Compiled:
    c = _COMPILED_CACHE.get(id(instance))
    if c is None or c.instance is not instance:
        if len(_COMPILED_CACHE) > 256:
            _COMPILED_CACHE.clear()
        c = _COMPILED_CACHE[id(instance)] = _Compiled(instance)
    return c


def _require_feasible(instance: Instance, bits: np.ndarray):
    if not is_feasible(instance, bits):
        raise InfeasibleAssignment("objective is only defined for feasible assignments")


def stream_key(seed) -> np.uint64:
    """64-bit kernel stream key for an integer seed (or SeedSequence)."""
    seq = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    return seq.generate_state(1, np.uint64)[0]


def sample_totals(instance: Instance, bits: np.ndarray, samples: int,
                  rng: np.random.Generator) -> np.ndarray:
    """``samples`` independent realizations of the employed count.

    One 64-bit key is drawn from ``rng`` to seed the kernel streams.
    """
    sel = np.flatnonzero(bits).astype(np.int64)
    key = rng.integers(0, 2**64, dtype=np.uint64)
    return _compiled(instance).totals(sel, samples, key, 0)


def interview_sample(instance: Instance, bits: np.ndarray, rng: np.random.Generator) -> int:
    if instance.model is not Model.INTERVIEW:
        raise ValueError("instance is not an interview-model instance")
    _require_feasible(instance, bits)
    return int(sample_totals(instance, bits, 1, rng)[0])


def coordination_sample(instance: Instance, bits: np.ndarray, rng: np.random.Generator) -> int:
    if instance.model is not Model.COORDINATION:
        raise ValueError("instance is not a coordination-model instance")
    _require_feasible(instance, bits)
    return int(sample_totals(instance, bits, 1, rng)[0])


# --- exact oracle ------------------------------------------------------------

def _interview_fixed_order(ps, jobs: int) -> float:
    # distribution over remaining jobs before each interview
    dist = {jobs: 1.0}
    expected = 0.0
    for p in ps:
        nxt: dict[int, float] = {}
        for j, w in dist.items():
            hit = 1.0 - (1.0 - p) ** j if j > 0 else 0.0
            expected += w * hit
            if hit > 0.0:
                nxt[j - 1] = nxt.get(j - 1, 0.0) + w * hit
            if hit < 1.0:
                nxt[j] = nxt.get(j, 0.0) + w * (1.0 - hit)
        dist = nxt
    return expected


def _interview_exact(instance: Instance, pairs) -> float:
    groups: dict[tuple[int, int], list[float]] = {}
    for v, l in pairs:
        groups.setdefault((l, int(instance.professions[v])), []).append(float(instance.probs[v, l]))
    total = 0.0
    for (l, pi), ps in groups.items():
        jobs = int(instance.jobs[l, pi])
        if jobs == 0:
            continue
        if len(ps) > INTERVIEW_GROUP_LIMIT:
            raise OracleLimitExceeded(
                f"interview group of {len(ps)} migrants exceeds limit {INTERVIEW_GROUP_LIMIT}")
        perms = list(itertools.permutations(ps))
        total += math.fsum(_interview_fixed_order(order, jobs) for order in perms) / len(perms)
    return total


def _coordination_exact(instance: Instance, pairs) -> float:
    total = 0.0
    for l in range(instance.n_localities):
        left = [v for v, ll in pairs if ll == l]
        if not left:
            continue
        job_prof = np.repeat(np.arange(instance.num_professions), instance.jobs[l])
        forced, free = [], []
        for i, v in enumerate(left):
            for r, pi in enumerate(job_prof):
                p = float(instance.probs[v, pi])
                if p >= 1.0:
                    forced.append((i, r))
                elif p > 0.0:
                    free.append(((i, r), p))
        if len(free) > COORDINATION_FREE_EDGE_LIMIT:
            raise OracleLimitExceeded(
                f"locality {l} has {len(free)} uncertain edges, limit {COORDINATION_FREE_EDGE_LIMIT}")
        acc = []
        for mask in range(1 << len(free)):
            prob = 1.0
            edges = list(forced)
            for b, (edge, p) in enumerate(free):
                if mask >> b & 1:
                    prob *= p
                    edges.append(edge)
                else:
                    prob *= 1.0 - p
            if prob == 0.0:
                continue
            size = max_bipartite_matching(BipartiteGraph(len(left), len(job_prof), edges))
            acc.append(prob * size)
        total += math.fsum(acc)
    return total


def exact_objective(instance: Instance, bits: np.ndarray) -> float:
    """Exact expected number of employed migrants (tiny instances only)."""
    _require_feasible(instance, bits)
    nl = instance.n_localities
    pairs = [(int(i // nl), int(i % nl)) for i in np.flatnonzero(bits)]
    if instance.model is Model.INTERVIEW:
        return _interview_exact(instance, pairs)
    return _coordination_exact(instance, pairs)


# --- evaluator -------------------------------------------------------------------

class Evaluator:
    """Objective estimator bound to one instance.

    Monte-Carlo mode averages ``samples`` simulations.  Call ``k`` reads the
    random streams (key(seed), k, sample), so estimates depend only on the
    seed and the sequence of calls.  Exact mode memoizes the oracle.
    ``evaluations`` counts estimate calls.
    """

    def __init__(self, instance: Instance, samples: int | None = 1000, seed: int = 0,
                 exact: bool = False):
        if not exact and (samples is None or samples < 1):
            raise ValueError("samples must be a positive integer")
        self.instance = instance
        self.exact = exact
        self.samples = None if exact else int(samples)
        self.seed = seed
        self.key = stream_key(seed)
        self.evaluations = 0
        self._memo: dict[bytes, float] = {}

    @classmethod
    def exact_oracle(cls, instance: Instance) -> "Evaluator":
        return cls(instance, samples=None, exact=True)

    @cached_property
    def _comp(self) -> _Compiled:
        return _compiled(self.instance)

    def estimate(self, bits: np.ndarray) -> float:
        self.evaluations += 1
        if self.exact:
            key = np.packbits(bits).tobytes()
            val = self._memo.get(key)
            if val is None:
                val = self._memo[key] = exact_objective(self.instance, bits)
            return val
        sel = np.flatnonzero(bits)
        if sel.size == 0:
            return 0.0
        totals = self._comp.totals(sel, self.samples, self.key, self.evaluations)
        return float(totals.sum()) / self.samples

    def bi_objective(self, bits: np.ndarray) -> ObjectivePair:
        zeros = int(bits.size - np.count_nonzero(bits))
        if not is_feasible(self.instance, bits):
            return ObjectivePair(-1.0, zeros)
        return ObjectivePair(self.estimate(bits), zeros)


def estimate_objective(evaluator: Evaluator, instance: Instance, bits: np.ndarray) -> float:
    if instance is not evaluator.instance:
        raise ValueError("evaluator is bound to a different instance")
    return evaluator.estimate(bits)


def bi_objective(evaluator: Evaluator, instance: Instance, bits: np.ndarray) -> ObjectivePair:
    if instance is not evaluator.instance:
        raise ValueError("evaluator is bound to a different instance")
    return evaluator.bi_objective(bits)
