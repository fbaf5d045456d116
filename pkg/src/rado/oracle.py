"""Exact maximum-volume disjoint subcollections.

The optimum is a maximum-weight independent set of the intersection graph.
Each connected component is solved separately: complete components are
trivial, the rest go to a branch-and-bound over bitmasks with a greedy
clique-cover upper bound. A second, index-ordered pass extracts the
lexicographically smallest optimal set so results are reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InputError, ResourceLimitError
from .geometry import Collection, VolumeEstimate, adjacency_matrix, union_volume, volume

DEFAULT_CAP = 64


@dataclass(frozen=True)
class IntersectionGraph:
    n: int
    adjacency: np.ndarray
    weights: np.ndarray

    def neighbours(self, i: int) -> list[int]:
        return np.flatnonzero(self.adjacency[i]).tolist()

    def edges(self) -> list[tuple[int, int]]:
        i, j = np.nonzero(np.triu(self.adjacency, 1))
        return list(zip(i.tolist(), j.tolist()))

    def is_independent(self, subset) -> bool:
        s = list(subset)
        return not self.adjacency[np.ix_(s, s)].any() if s else True


@dataclass(frozen=True)
class OracleResult:
    chosen: tuple[int, ...]
    selected_volume: float
    union_volume: VolumeEstimate
    delta: float
    nodes_explored: int
    proven_optimal: bool = True
    forbidden: tuple[int, ...] = field(default=())

    def to_dict(self) -> dict:
        return {
            "chosen": list(self.chosen),
            "selected_volume": self.selected_volume,
            "union_volume": self.union_volume.to_dict(),
            "delta": self.delta,
            "nodes_explored": self.nodes_explored,
            "proven_optimal": self.proven_optimal,
            "forbidden": list(self.forbidden),
        }


def intersection_graph(c: Collection) -> IntersectionGraph:
    weights = np.array([volume(b) for b in c.bodies])
    return IntersectionGraph(len(c), adjacency_matrix(c), weights)


class _Solver:
    """Branch and bound on one connected component (local indices 0..m-1)."""

    def __init__(self, adj: np.ndarray, weights: np.ndarray):
        m = len(weights)
        self.m = m
        self.w = [float(x) for x in weights]
        self.nbr = [sum(1 << int(j) for j in np.flatnonzero(adj[i])) for i in range(m)]
        # heaviest first, then by fewest neighbours, then by index
        degree = adj.sum(axis=1)
        self.order = sorted(range(m), key=lambda i: (-self.w[i], degree[i], i))
        self.tol = 1e-9 * max(1.0, sum(self.w))
        self.nodes = 0

    def bound(self, P: int) -> float:
        # greedy clique cover: each clique contributes its heaviest member
        commons: list[int] = []
        total = 0.0
        for v in self.order:
            if not P >> v & 1:
                continue
            for k, common in enumerate(commons):
                if common >> v & 1:
                    commons[k] = common & self.nbr[v]
                    break
            else:
                commons.append(self.nbr[v])
                total += self.w[v]
        return total

    def best_value(self) -> float:
        best = [0.0]
        full = (1 << self.m) - 1
        order = self.order

        def search(P: int, cur: float):
            self.nodes += 1
            if P == 0:
                if cur > best[0]:
                    best[0] = cur
                return
            if cur + self.bound(P) <= best[0] + self.tol:
                return
            v = next(u for u in order if P >> u & 1)
            search(P & ~self.nbr[v] & ~(1 << v), cur + self.w[v])
            search(P & ~(1 << v), cur)

        search(full, 0.0)
        return best[0]

    def lex_smallest(self, target: float) -> list[int]:
        """Index-ordered, include-first DFS; the first leaf reaching ``target`` is lexicographically smallest."""
        full = (1 << self.m) - 1
        chosen: list[int] = []

        def search(P: int, cur: float) -> bool:
            self.nodes += 1
            if cur >= target - self.tol:
                return True
            if P == 0 or cur + self.bound(P) < target - self.tol:
                return False
            v = (P & -P).bit_length() - 1
            chosen.append(v)
            if search(P & ~self.nbr[v] & ~(1 << v), cur + self.w[v]):
                return True
            chosen.pop()
            return search(P & ~(1 << v), cur)

        if not search(full, 0.0):
            raise RuntimeError("lexicographic pass failed to reach the optimum")
        return chosen


def _components(adj: np.ndarray, vertices: list[int]) -> list[list[int]]:
    allowed = set(vertices)
    seen: set[int] = set()
    comps = []
    for s in vertices:
        if s in seen:
            continue
        stack, comp = [s], []
        seen.add(s)
        while stack:
            u = stack.pop()
            comp.append(u)
            for v in np.flatnonzero(adj[u]):
                v = int(v)
                if v in allowed and v not in seen:
                    seen.add(v)
                    stack.append(v)
        comps.append(sorted(comp))
    return comps


def solve_mwis(graph: IntersectionGraph, forbidden=(), cap: int = DEFAULT_CAP,
               weights=None) -> tuple[list[int], float, int]:
    """Maximum-weight independent set avoiding ``forbidden``.

    Returns (sorted chosen indices, total weight, search nodes). The cap applies
    to the largest connected component that is not a clique.
    """
    w = graph.weights if weights is None else np.asarray(weights, dtype=float)
    forbidden = set(int(i) for i in forbidden)
    if any(i < 0 or i >= graph.n for i in forbidden):
        raise InputError(f"forbidden indices must lie in [0, {graph.n})")
    vertices = [i for i in range(graph.n) if i not in forbidden]
    chosen: list[int] = []
    nodes = 0
    for comp in _components(graph.adjacency, vertices):
        sub = graph.adjacency[np.ix_(comp, comp)]
        m = len(comp)
        if sub.sum() == m * (m - 1):
            # clique: heaviest vertex, lowest index on ties
            wc = w[comp]
            chosen.append(comp[int(np.flatnonzero(wc >= wc.max() - 1e-12 * max(1.0, wc.max()))[0])])
            nodes += 1
            continue
        if m > cap:
            raise ResourceLimitError(f"component with {m} vertices exceeds the oracle cap of {cap}")
        solver = _Solver(sub, w[comp])
        target = solver.best_value()
        chosen.extend(comp[k] for k in solver.lex_smallest(target))
        nodes += solver.nodes
    chosen.sort()
    return chosen, float(sum(w[i] for i in chosen)), nodes


def max_disjoint_volume(c: Collection, forbidden=(), cap: int = DEFAULT_CAP) -> OracleResult:
    graph = intersection_graph(c)
    chosen, value, nodes = solve_mwis(graph, forbidden, cap)
    union = union_volume(c)
    return OracleResult(tuple(chosen), value, union, value / union.value, nodes, True,
                        tuple(sorted(set(int(i) for i in forbidden))))


def delta(c: Collection, cap: int = DEFAULT_CAP) -> float:
    return max_disjoint_volume(c, (), cap).delta


def independence_number(c: Collection, cap: int = DEFAULT_CAP) -> int:
    graph = intersection_graph(c)
    chosen, _, _ = solve_mwis(graph, (), cap, weights=np.ones(graph.n))
    return len(chosen)


def brute_force_mwis(adj: np.ndarray, weights, forbidden=()) -> tuple[float, list[int]]:
    """Reference optimum by enumerating all 2^n subsets (small n only)."""
    n = len(weights)
    if n > 20:
        raise ResourceLimitError("brute force enumeration is limited to 20 vertices")
    forbidden = set(forbidden)
    best, best_set = 0.0, []
    for mask in range(1 << n):
        s = [i for i in range(n) if mask >> i & 1]
        if forbidden.intersection(s):
            continue
        if len(s) > 1 and adj[np.ix_(s, s)].any():
            continue
        val = float(sum(weights[i] for i in s))
        if val > best + 1e-12:
            best, best_set = val, s
    return best, best_set
