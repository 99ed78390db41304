"""Ordering manipulation primitives for minimum execution time.

Sequencing is an open-tour travelling-salesman problem over a cost matrix
whose entry (i, j) is travel time plus tool change time. Best-first search
over (current node, visited set) states finds the optimum with a zero,
nearest-unvisited-neighbour or minimum-spanning-tree lower bound; a greedy
nearest-neighbour tour serves as the fast baseline.
"""

from __future__ import annotations

import heapq
import itertools
import math
import time
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from .errors import EmptyProblem, MissingPose, TooLarge
from .geometry import segment_box_distance
from .hmp import ManipulationPrimitive, Plan

METHODS = ("dijkstra", "astar_nn", "astar_mst", "greedy_nn")
HEURISTIC_ALIASES = {"dijkstra": "dijkstra", "nn": "astar_nn", "mst": "astar_mst", "greedy": "greedy_nn"}


@dataclass
class CostMatrix:
    """Square matrix over ``[start] + nodes``; row/column 0 is the start."""

    cost: np.ndarray
    labels: list[str] = field(default_factory=list)

    def __post_init__(self):
        self.cost = np.asarray(self.cost, dtype=float)
        if self.cost.ndim != 2 or self.cost.shape[0] != self.cost.shape[1]:
            raise ValueError("cost matrix must be square")
        off = self.cost[~np.eye(len(self.cost), dtype=bool)]
        if (off < 0).any() or not np.isfinite(off).all():
            raise ValueError("cost entries must be finite and non-negative")
        if not self.labels:
            self.labels = ["start"] + [str(i) for i in range(1, len(self.cost))]

    @property
    def size(self) -> int:
        """Number of nodes to visit (start excluded)."""
        return len(self.cost) - 1

    def tour_cost(self, order: Sequence[int]) -> float:
        total, prev = 0.0, 0
        for j in order:
            total += float(self.cost[prev, j])
            prev = j
        return total


def random_matrix(n: int, rng: np.random.Generator, low=1.0, high=10.0) -> CostMatrix:
    """Asymmetric matrix with entries uniform in [low, high) for ``n`` nodes."""
    c = rng.uniform(low, high, size=(n + 1, n + 1))
    np.fill_diagonal(c, 0.0)
    return CostMatrix(c)


@dataclass
class SequenceResult:
    order: list[int]
    total_cost: float
    expanded: int
    wall_time: float
    method: str = ""
    trace: list | None = None


# -- heuristics -------------------------------------------------------------


def _mst_weight(sym: np.ndarray, nodes: list[int]) -> float:
    """Prim's algorithm on the complete graph over ``nodes``."""
    if len(nodes) < 2:
        return 0.0
    sub = sym[np.ix_(nodes, nodes)]
    k = len(nodes)
    in_tree = np.zeros(k, dtype=bool)
    best = np.full(k, np.inf)
    best[0] = 0.0
    total = 0.0
    for _ in range(k):
        cand = np.where(in_tree, np.inf, best)
        u = int(np.argmin(cand))
        total += cand[u]
        in_tree[u] = True
        best = np.minimum(best, sub[u])
    return float(total)


def make_heuristic(method: str, matrix: CostMatrix) -> Callable[[int, int], float]:
    n = matrix.size
    full = (1 << n) - 1
    cost = matrix.cost
    if method == "dijkstra":
        return lambda current, visited: 0.0
    if method == "astar_nn":

        def h_nn(current, visited):
            if visited == full:
                return 0.0
            return min(cost[current, j] for j in range(1, n + 1) if not visited >> (j - 1) & 1)

        return h_nn
    if method == "astar_mst":
        # symmetric lower bound keeps the estimate admissible for asymmetric costs
        sym = np.minimum(cost, cost.T)
        memo: dict[tuple[int, int], float] = {}

        def h_mst(current, visited):
            if visited == full:
                return 0.0
            key = (current, visited)
            if key not in memo:
                nodes = [current] + [j for j in range(1, n + 1) if not visited >> (j - 1) & 1]
                memo[key] = _mst_weight(sym, nodes)
            return memo[key]

        return h_mst
    raise ValueError(f"unknown heuristic {method!r}")


# -- solvers ----------------------------------------------------------------


def _best_first(matrix: CostMatrix, method: str, trace: bool) -> SequenceResult:
    n = matrix.size
    full = (1 << n) - 1
    cost = matrix.cost
    h = make_heuristic(method, matrix)
    t0 = time.perf_counter()
    best_g = {(0, 0): 0.0}
    parent: dict[tuple[int, int], tuple[int, int] | None] = {(0, 0): None}
    # ties: lower (current, visited) first
    h0 = h(0, 0)
    heap = [(h0, 0, 0, 0.0, h0)]
    expanded = 0
    records = [] if trace else None
    while heap:
        _, current, visited, g, hv = heapq.heappop(heap)
        if g > best_g[(current, visited)]:
            continue
        if visited == full:
            order = []
            state = (current, visited)
            while state is not None and state != (0, 0):
                order.append(state[0])
                state = parent[state]
            order.reverse()
            return SequenceResult(order, g, expanded, time.perf_counter() - t0, method, records)
        expanded += 1
        if records is not None:
            records.append((current, visited, g, hv))
        for j in range(1, n + 1):
            bit = 1 << (j - 1)
            if visited & bit:
                continue
            state = (j, visited | bit)
            g2 = g + float(cost[current, j])
            if g2 < best_g.get(state, math.inf):
                best_g[state] = g2
                parent[state] = (current, visited)
                h2 = h(*state)
                heapq.heappush(heap, (g2 + h2, j, visited | bit, g2, h2))
    raise AssertionError("search space exhausted without reaching the goal")


def _greedy(matrix: CostMatrix) -> SequenceResult:
    n = matrix.size
    t0 = time.perf_counter()
    left = list(range(1, n + 1))
    order, current, total = [], 0, 0.0
    while left:
        j = min(left, key=lambda k: (matrix.cost[current, k], k))
        total += float(matrix.cost[current, j])
        order.append(j)
        left.remove(j)
        current = j
    return SequenceResult(order, total, n, time.perf_counter() - t0, "greedy_nn")


def solve_sequence(matrix: CostMatrix, method: str = "astar_mst", trace: bool = False) -> SequenceResult:
    """Order every node of ``matrix`` starting from node 0, without returning."""
    method = HEURISTIC_ALIASES.get(method, method)
    if method not in METHODS:
        raise ValueError(f"unknown sequencing method {method!r}")
    if matrix.size < 1:
        raise EmptyProblem("nothing to sequence")
    if method == "greedy_nn":
        return _greedy(matrix)
    return _best_first(matrix, method, trace)


def brute_force_sequence(matrix: CostMatrix) -> SequenceResult:
    n = matrix.size
    if n > 10:
        raise TooLarge(f"{n} nodes exceed the enumeration limit of 10")
    if n < 1:
        raise EmptyProblem("nothing to sequence")
    t0 = time.perf_counter()
    best, best_order, count = math.inf, None, 0
    for perm in itertools.permutations(range(1, n + 1)):
        count += 1
        c = matrix.tour_cost(perm)
        if c < best:
            best, best_order = c, list(perm)
    return SequenceResult(best_order, best, count, time.perf_counter() - t0, "brute_force")


def remaining_cost(matrix: CostMatrix, current: int, visited: int) -> float:
    """Exact cheapest completion from a search state, by enumeration."""
    n = matrix.size
    left = [j for j in range(1, n + 1) if not visited >> (j - 1) & 1]
    if not left:
        return 0.0
    best = math.inf
    for perm in itertools.permutations(left):
        total, prev = 0.0, current
        for j in perm:
            total += float(matrix.cost[prev, j])
            prev = j
        best = min(best, total)
    return best


# -- plans to matrices -------------------------------------------------------


def filter_visible(primitives: Iterable[ManipulationPrimitive], visible: set[str]) -> list[ManipulationPrimitive]:
    if isinstance(primitives, Plan):
        primitives = primitives.primitives
    return [mp for mp in primitives if mp.component in visible]


def group_chains(primitives: Sequence[ManipulationPrimitive]) -> list[list[ManipulationPrimitive]]:
    """Per-component chains in order of first appearance; each is one sequencing node."""
    chains: dict[str, list[ManipulationPrimitive]] = {}
    for mp in primitives:
        chains.setdefault(mp.component, []).append(mp)
    return list(chains.values())


def _tool_change(tools: dict[str, float], a: str | None, b: str) -> float:
    if a is None or a == b:
        return 0.0
    return float(tools.get(b, 0.0))


def chain_cost_matrix(
    chains: Sequence[Sequence[ManipulationPrimitive]],
    positions: dict[str, Sequence[float]],
    tools: dict[str, float],
    start_position=(0.0, 0.0, 0.0),
    start_tool: str | None = None,
    speed: float = 0.25,
    path_time: Callable[[str | None, str], float] | None = None,
) -> CostMatrix:
    """Cost of entering chain j after chain i.

    Travel time comes from ``path_time`` when given, else from straight-line
    distance at ``speed`` m/s. Tool changes inside a chain are folded into the
    cost of entering it, so tour cost is the full execution time.
    """
    n = len(chains)
    comps = [ch[0].component for ch in chains]
    pts = [np.asarray(start_position, float)]
    for c in comps:
        if c not in positions or positions[c] is None:
            raise MissingPose(f"component {c!r} has no pose")
        pts.append(np.asarray(positions[c], float))
    first_tool = [None] + [ch[0].tool for ch in chains]
    last_tool = [start_tool] + [ch[-1].tool for ch in chains]
    internal = [0.0] + [
        sum(_tool_change(tools, a.tool, b.tool) for a, b in zip(ch, ch[1:])) for ch in chains
    ]
    names = [None] + comps
    cost = np.zeros((n + 1, n + 1))
    for i in range(n + 1):
        for j in range(1, n + 1):
            if i == j:
                continue
            if path_time is not None:
                travel = path_time(names[i], names[j])
            else:
                travel = float(np.linalg.norm(pts[j] - pts[i])) / speed
            cost[i, j] = travel + _tool_change(tools, last_tool[i], first_tool[j]) + internal[j]
    return CostMatrix(cost, ["start"] + comps)


# -- accessibility -------------------------------------------------------------


@dataclass(frozen=True)
class AccessibilityConfig:
    radius: float = 0.05
    length: float = 0.30


def probe_segment(component, direction, length: float):
    """Capsule axis from the component's surface along its removal direction."""
    if component.pose is None:
        raise MissingPose(f"component {component.id!r} has no pose")
    d = np.asarray(direction, float)
    d = d / np.linalg.norm(d)
    start = np.asarray(component.position, float)
    if component.aabb is not None:
        # leave the component's own box along d
        start = start + d * float(np.abs(d) @ (0.5 * np.asarray(component.aabb)))
    return start, start + length * d


def capsule_hits_map(a, b, radius: float, vmap) -> bool:
    """True iff the capsule around segment [a, b] touches an obstacle voxel."""
    lo = np.minimum(a, b) - radius
    hi = np.maximum(a, b) + radius
    # voxels whose cube intersects the capsule's bounding box
    first = np.floor((lo - vmap.origin) / vmap.resolution).astype(int)
    stop = np.floor((hi - vmap.origin) / vmap.resolution).astype(int) + 1
    dims = np.asarray(vmap.dims)
    first, stop = np.clip(first, 0, dims), np.clip(stop, 0, dims)
    block = vmap.blocked[first[0]:stop[0], first[1]:stop[1], first[2]:stop[2]]
    idx = np.argwhere(block)
    if len(idx) == 0:
        return False
    idx = idx + first
    vlo = vmap.origin + idx * vmap.resolution
    vhi = vlo + vmap.resolution
    return bool((segment_box_distance(a, b, vlo, vhi) <= radius).any())


def filter_accessible(primitives, vmap, probe: AccessibilityConfig, model, directions) -> list:
    """Keep primitives whose component can be approached along its removal direction.

    One capsule query per primitive.
    """
    out = []
    for mp in primitives:
        comp = model.component(mp.component)
        d = directions.get(mp.component)
        if d is None:
            raise MissingPose(f"no removal direction for {mp.component!r}")
        a, b = probe_segment(comp, d, probe.length)
        if not capsule_hits_map(a, b, probe.radius, vmap):
            out.append(mp)
    return out
