"""Paired two-sided Wilcoxon signed-rank test and rank helpers."""
from __future__ import annotations

import math

import numpy as np
from scipy.stats import rankdata

EXACT_LIMIT = 12


def _signed_rank_setup(a, b):
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape or a.ndim != 1:
        raise ValueError("samples must be 1-d and of equal length")
    if a.size == 0:
        raise ValueError("need at least one pair")
    d = a - b
    d = d[d != 0]
    return d, rankdata(np.abs(d))


def _exact_p(d: np.ndarray, ranks: np.ndarray) -> float:
    n = d.size
    # doubled ranks are integers even with ties (average ranks are k/2)
    r2 = np.rint(2 * ranks).astype(np.int64)
    w = int(r2[d > 0].sum())
    masks = np.arange(1 << n, dtype=np.int64)
    bits = (masks[:, None] >> np.arange(n)) & 1
    dist = bits @ r2
    upper = np.count_nonzero(dist >= w)
    lower = np.count_nonzero(dist <= w)
    return min(1.0, 2 * min(upper, lower) / dist.size)


def _normal_p(d: np.ndarray, ranks: np.ndarray) -> float:
    n = d.size
    w = ranks[d > 0].sum()
    mean = n * (n + 1) / 4
    _, counts = np.unique(ranks, return_counts=True)
    var = n * (n + 1) * (2 * n + 1) / 24 - np.sum(counts**3 - counts) / 48
    if var <= 0:
        return 1.0
    # continuity correction toward the mean
    z = max(abs(w - mean) - 0.5, 0.0) / math.sqrt(var)
    return min(1.0, math.erfc(z / math.sqrt(2)))


def wilcoxon_signed_rank(a, b, exact_limit: int = EXACT_LIMIT) -> float:
    """Two-sided p-value for paired samples; zero differences are dropped.

    Up to ``exact_limit`` nonzero pairs the null distribution is enumerated
    over all sign assignments, beyond that a tie-corrected normal
    approximation is used.  All-zero differences give p = 1.
    """
    d, ranks = _signed_rank_setup(a, b)
    if d.size == 0:
        return 1.0
    if d.size <= exact_limit:
        return _exact_p(d, ranks)
    return _normal_p(d, ranks)


def wilcoxon_normal(a, b) -> float:
    """Normal-approximation p-value regardless of sample size."""
    d, ranks = _signed_rank_setup(a, b)
    if d.size == 0:
        return 1.0
    return _normal_p(d, ranks)


def rank_rows(values: np.ndarray) -> np.ndarray:
    """Rank algorithms within each row, 1 = largest value, ties averaged."""
    values = np.asarray(values, dtype=float)
    return rankdata(-values, axis=1)
