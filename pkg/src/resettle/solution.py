"""Bit-vector solutions, matroid feasibility, variation operators and dominance.

A solution is a boolean numpy vector of length n = |V|*|L|; bit ``i*|L| + j``
selects the pair (migrant i, locality j).  Reshaping to (|V|, |L|) gives the
matrix view, rows being migrants.
"""
from __future__ import annotations

import enum
from typing import NamedTuple

import numpy as np

from . import _kernels
from .instance import Instance


class ObjectivePair(NamedTuple):
    """(f1, f2): estimated objective (-1 if infeasible) and number of 0-bits."""

    f1: float
    f2: int


class Dominance(enum.Enum):
    FIRST_DOMINATES = "first_dominates"
    SECOND_DOMINATES = "second_dominates"
    FIRST_WEAKLY_DOMINATES = "first_weakly_dominates"
    SECOND_WEAKLY_DOMINATES = "second_weakly_dominates"
    EQUAL = "equal"
    INCOMPARABLE = "incomparable"


class SwapMode(enum.Enum):
    ROWS = "rows"
    COLUMNS = "columns"


def empty_assignment(instance: Instance) -> np.ndarray:
    return np.zeros(instance.n, dtype=bool)


def from_pairs(instance: Instance, pairs) -> np.ndarray:
    bits = empty_assignment(instance)
    nl = instance.n_localities
    for v, l in pairs:
        bits[v * nl + l] = True
    return bits


def to_pairs(instance: Instance, bits: np.ndarray) -> list[tuple[int, int]]:
    """Selected (migrant, locality) pairs in lexicographic order."""
    idx = np.flatnonzero(bits)
    nl = instance.n_localities
    return [(int(i // nl), int(i % nl)) for i in idx]


def format_pairs(instance: Instance, bits: np.ndarray) -> str:
    return " ".join(f"({v},{l})" for v, l in to_pairs(instance, bits))


def as_matrix(instance: Instance, bits: np.ndarray) -> np.ndarray:
    return bits.reshape(instance.n_migrants, instance.n_localities)


def _check_size(instance: Instance, bits: np.ndarray):
    if bits.shape != (instance.n,):
        raise ValueError(f"assignment has length {bits.shape}, instance needs {instance.n}")


def is_feasible(instance: Instance, bits: np.ndarray) -> bool:
    """True iff no migrant gets two localities and no locality exceeds its capacity."""
    _check_size(instance, bits)
    return bool(_kernels.feasible(bits, instance.n_localities, instance.capacities))


def bitwise_mutation(bits: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Flip every bit independently with probability 1/n."""
    n = bits.shape[0]
    return bits ^ (rng.random(n) < 1.0 / n)


def one_point_crossover(a: np.ndarray, b: np.ndarray, rng: np.random.Generator,
                        cut: int | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Exchange the bits after position ``cut`` (1-based, uniform on 1..n)."""
    if a.shape != b.shape:
        raise ValueError("parents must have equal length")
    n = a.shape[0]
    if cut is None:
        cut = int(rng.integers(1, n + 1))
    if not 1 <= cut <= n:
        raise ValueError(f"cut must be in [1, {n}]")
    x, y = a.copy(), b.copy()
    x[cut:], y[cut:] = b[cut:], a[cut:]
    return x, y


def matrix_swap_mutation(instance: Instance, bits: np.ndarray, rng: np.random.Generator,
                         mode: SwapMode) -> np.ndarray:
    """Swap two rows or two columns of the matrix view; indices drawn with replacement."""
    m = as_matrix(instance, bits).copy()
    if mode is SwapMode.ROWS:
        i, j = rng.integers(0, instance.n_migrants, size=2)
        if i != j:
            row = m[i].copy()
            m[i] = m[j]
            m[j] = row
    else:
        i, j = rng.integers(0, instance.n_localities, size=2)
        if i != j:
            m[:, i], m[:, j] = m[:, j].copy(), m[:, i].copy()
    return m.reshape(-1)


def _drop_excess(line: np.ndarray, limit: int, rng: np.random.Generator):
    ones = np.flatnonzero(line)
    excess = ones.size - limit
    if excess > 0:
        line[rng.permutation(ones)[:excess]] = False


def repair(instance: Instance, bits: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Clear randomly chosen excess 1-bits, rows first, then columns.

    Only 1 -> 0 flips happen and a feasible input comes back unchanged.
    """
    _check_size(instance, bits)
    if _kernels.feasible(bits, instance.n_localities, instance.capacities):
        return bits.copy()
    m = as_matrix(instance, bits).copy()
    rows = m.sum(axis=1)
    for i in np.flatnonzero(rows > 1):
        _drop_excess(m[i], 1, rng)
    cols = m.sum(axis=0)
    for j in np.flatnonzero(cols > instance.capacities):
        col = m[:, j]  # a copy for column slices of a C-ordered array
        _drop_excess(col, int(instance.capacities[j]), rng)
        m[:, j] = col
    return m.reshape(-1)


def random_feasible(instance: Instance, rng: np.random.Generator) -> np.ndarray:
    """Visit migrants in random order; each joins a random locality with spare room w.p. 1/2."""
    spare = instance.capacities.astype(np.int64).copy()
    m = np.zeros((instance.n_migrants, instance.n_localities), dtype=bool)
    for v in rng.permutation(instance.n_migrants):
        if rng.random() >= 0.5:
            continue
        open_ = np.flatnonzero(spare > 0)
        if open_.size == 0:
            break
        l = open_[rng.integers(open_.size)]
        m[v, l] = True
        spare[l] -= 1
    return m.reshape(-1)


def weakly_dominates(p: ObjectivePair, q: ObjectivePair) -> bool:
    return p[0] >= q[0] and p[1] >= q[1]


def dominates(p: ObjectivePair, q: ObjectivePair) -> bool:
    return p[0] >= q[0] and p[1] >= q[1] and (p[0] > q[0] or p[1] > q[1])


def compare(p: ObjectivePair, q: ObjectivePair) -> Dominance:
    pq, qp = weakly_dominates(p, q), weakly_dominates(q, p)
    if pq and qp:
        return Dominance.EQUAL
    if pq:
        return Dominance.FIRST_DOMINATES
    if qp:
        return Dominance.SECOND_DOMINATES
    return Dominance.INCOMPARABLE
