"""Maximum-cardinality bipartite matching (Hopcroft-Karp)."""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Sequence


@dataclass(frozen=True)
class BipartiteGraph:
    n_left: int
    n_right: int
    edges: Sequence[tuple[int, int]]

    def __post_init__(self):
        for u, v in self.edges:
            if not (0 <= u < self.n_left and 0 <= v < self.n_right):
                raise ValueError(f"edge ({u}, {v}) out of range")

    def adjacency(self) -> list[list[int]]:
        adj: list[list[int]] = [[] for _ in range(self.n_left)]
        for u, v in self.edges:
            adj[u].append(v)
        return adj


_INF = float("inf")


def max_bipartite_matching(g: BipartiteGraph) -> int:
    """Size of a maximum matching."""
    adj = g.adjacency()
    match_l = [-1] * g.n_left
    match_r = [-1] * g.n_right
    dist = [0.0] * g.n_left

    def bfs() -> bool:
        queue = deque()
        for u in range(g.n_left):
            if match_l[u] < 0:
                dist[u] = 0
                queue.append(u)
            else:
                dist[u] = _INF
        found = False
        while queue:
            u = queue.popleft()
            for v in adj[u]:
                w = match_r[v]
                if w < 0:
                    found = True
                elif dist[w] == _INF:
                    dist[w] = dist[u] + 1
                    queue.append(w)
        return found

    def dfs(u: int) -> bool:
        for v in adj[u]:
            w = match_r[v]
            if w < 0 or (dist[w] == dist[u] + 1 and dfs(w)):
                match_l[u] = v
                match_r[v] = u
                return True
        dist[u] = _INF
        return False

    size = 0
    while bfs():
        for u in range(g.n_left):
            if match_l[u] < 0 and dfs(u):
                size += 1
    return size
