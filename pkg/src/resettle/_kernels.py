"""Compiled Monte-Carlo samplers.

Randomness is counter-based: sample ``s`` of call ``call`` under stream
``key`` reads its own splitmix64 sequence, so a result depends only on
(key, call, sample) and never on scheduling.  Handing a numpy Generator to
compiled code costs several microseconds per call plus a function-pointer
hop per draw, which dominated the small estimates the solvers make.
"""
import numpy as np
from numba import njit

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S11 = np.uint64(11)
_UNIT = 1.0 / 9007199254740992.0  # 2**-53


@njit(inline="always")
def _mix(z):
    z = (z ^ (z >> _S30)) * _M1
    z = (z ^ (z >> _S27)) * _M2
    return z ^ (z >> _S31)


@njit(inline="always")
def _stream(key, call, s):
    h = _mix(key + _GOLDEN * (np.uint64(call) + np.uint64(1)))
    return _mix(h ^ (_GOLDEN * (np.uint64(s) + np.uint64(1))))


@njit(inline="always")
def _uniform(state):
    """Advance a one-element uint64 state and return a double in [0, 1)."""
    state[0] += _GOLDEN
    return float(_mix(state[0]) >> _S11) * _UNIT


@njit(cache=True)
def uniforms(key, call, s, count):
    """The first ``count`` draws of one sample stream (exposed for tests)."""
    state = np.empty(1, np.uint64)
    state[0] = _stream(np.uint64(key), call, s)
    out = np.empty(count)
    for i in range(count):
        out[i] = _uniform(state)
    return out


@njit(cache=True)
def interview_totals(sel, n_loc, professions, n_prof, probs, jobs_flat, n_samples, key, call):
    """Employed count per sample for selected pair indices ``sel``.

    Each (locality, profession) queue is shuffled per sample before the
    sequential interviews.
    """
    m = sel.shape[0]
    out = np.zeros(n_samples)
    if m == 0:
        return out
    group = np.empty(m, np.int64)
    p = np.empty(m)
    for k in range(m):
        v = sel[k] // n_loc
        l = sel[k] % n_loc
        group[k] = l * n_prof + professions[v]
        p[k] = probs[v, l]
    idx = np.argsort(group, kind="mergesort")
    g_sorted = group[idx]
    p_sorted = p[idx]
    max_jobs = 0
    for k in range(m):
        if jobs_flat[g_sorted[k]] > max_jobs:
            max_jobs = jobs_flat[g_sorted[k]]
    # miss[k, j] = (1 - p)^j, the chance that all j applications fail
    miss = np.empty((m, max_jobs + 1))
    for k in range(m):
        miss[k, 0] = 1.0
        for j in range(1, max_jobs + 1):
            miss[k, j] = miss[k, j - 1] * (1.0 - p_sorted[k])
    order = np.empty(m, np.int64)
    state = np.empty(1, np.uint64)
    key = np.uint64(key)
    for s in range(n_samples):
        state[0] = _stream(key, call, s)
        total = 0
        a = 0
        while a < m:
            b = a + 1
            while b < m and g_sorted[b] == g_sorted[a]:
                b += 1
            remaining = jobs_flat[g_sorted[a]]
            if remaining > 0:
                for k in range(a, b):
                    order[k] = k
                for k in range(b - 1, a, -1):
                    r = a + int(_uniform(state) * (k - a + 1))
                    t = order[k]
                    order[k] = order[r]
                    order[r] = t
                for k in range(a, b):
                    if remaining == 0:
                        break
                    if _uniform(state) < 1.0 - miss[order[k], remaining]:
                        total += 1
                        remaining -= 1
            a = b
        out[s] = total
    return out


@njit(cache=True)
def coordination_totals(sel, pair_ptr, pair_slots, pair_p, n_slots, n_samples, key, call):
    """Maximum-matching size per sample of the random migrant/job graph.

    Every selected pair contributes one left vertex whose candidate edges
    (job slots at its locality, with probabilities) come from the CSR
    template ``pair_ptr/pair_slots/pair_p``.  Localities never share slots, so
    one matching over the disjoint union equals the per-locality sum.
    """
    m = sel.shape[0]
    out = np.zeros(n_samples)
    if m == 0:
        return out
    start = np.empty(m + 1, np.int64)
    start[0] = 0
    for k in range(m):
        start[k + 1] = start[k] + pair_ptr[sel[k] + 1] - pair_ptr[sel[k]]
    n_edges = start[m]
    e_slot = np.empty(n_edges, np.int64)
    e_p = np.empty(n_edges)
    for k in range(m):
        base = pair_ptr[sel[k]]
        for e in range(start[k], start[k + 1]):
            e_slot[e] = pair_slots[base + e - start[k]]
            e_p[e] = pair_p[base + e - start[k]]

    present = np.empty(n_edges, np.bool_)
    match_l = np.empty(m, np.int64)
    match_r = np.empty(n_slots, np.int64)
    seen = np.zeros(n_slots, np.int64)
    parent = np.empty(n_slots, np.int64)
    queue = np.empty(m, np.int64)
    stamp = 0
    state = np.empty(1, np.uint64)
    key = np.uint64(key)
    for s in range(n_samples):
        state[0] = _stream(key, call, s)
        for e in range(n_edges):
            present[e] = _uniform(state) < e_p[e]
        match_l[:] = -1
        for e in range(n_edges):
            match_r[e_slot[e]] = -1
        size = 0
        for root in range(m):
            direct = -1
            for e in range(start[root], start[root + 1]):
                if present[e] and match_r[e_slot[e]] < 0:
                    direct = e_slot[e]
                    break
            if direct >= 0:
                match_l[root] = direct
                match_r[direct] = root
                size += 1
                continue
            stamp += 1
            head = 0
            tail = 1
            queue[0] = root
            found = -1
            while head < tail and found < 0:
                x = queue[head]
                head += 1
                for e in range(start[x], start[x + 1]):
                    if not present[e]:
                        continue
                    r = e_slot[e]
                    if seen[r] == stamp:
                        continue
                    seen[r] = stamp
                    parent[r] = x
                    if match_r[r] < 0:
                        found = r
                        break
                    queue[tail] = match_r[r]
                    tail += 1
            if found >= 0:
                r = found
                while True:
                    x = parent[r]
                    nxt = match_l[x]
                    match_l[x] = r
                    match_r[r] = x
                    if x == root:
                        break
                    r = nxt
                size += 1
        out[s] = size
    return out


@njit(cache=True)
def feasible(bits, n_loc, capacities):
    """At most one locality per migrant and at most ``capacities[l]`` migrants per locality."""
    load = np.zeros(n_loc, np.int64)
    n_mig = bits.shape[0] // n_loc
    for v in range(n_mig):
        row = 0
        for l in range(n_loc):
            if bits[v * n_loc + l]:
                row += 1
                load[l] += 1
        if row > 1:
            return False
    for l in range(n_loc):
        if load[l] > capacities[l]:
            return False
    return True
