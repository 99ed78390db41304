"""Greedy, A*, RRT and bidirectional RRT in joint space.

The exploration stepsize lives in the workspace and is converted per node
to a joint step ``dq = s / r_max``, so no single joint step moves the end
effector further than ``s``. Search-based planners run on an implicit
lattice of integer multiples of the finest joint step anchored at the
start configuration; adaptive steps are integer multiples of it.
"""

from __future__ import annotations

import heapq
import math
import time
from dataclasses import dataclass, field

import numpy as np

from ..errors import InvalidGoal, InvalidStart
from ..worldmap import ASDTree, ProbabilisticVoxelMap, stepsize_at
from .collision import CollisionChecker
from .kinematics import ManipulatorModel, end_effector, ee_polyline

ALGORITHMS = ("greedy", "astar", "rrt", "birrt")
# smallest link inflation worth bisecting for; closer passes count as contact
SWEEP_TOL = 5e-4


@dataclass(frozen=True)
class PlannerConfig:
    """Planner settings.

    Each RRT iteration consumes exactly ``1 + n`` draws from the generator:
    one uniform for the goal bias, then one per joint for the random sample
    (drawn even when the bias wins, so streams stay aligned).
    """

    algorithm: str = "astar"
    stepsize: str = "fixed"  # fixed | adaptive
    s: float = 0.025
    budget: float = 60.0
    seed: int = 0
    goal_tol: float = 0.01
    goal_bias: float = 0.05
    max_iter: int | None = None

    def __post_init__(self):
        if self.algorithm not in ALGORITHMS and self.algorithm != "ucs":
            raise ValueError(f"unknown planner {self.algorithm!r}")
        if self.stepsize not in ("fixed", "adaptive"):
            raise ValueError("stepsize must be fixed or adaptive")
        if not self.budget > 0:
            raise ValueError("budget must be positive")
        if self.stepsize == "fixed" and not self.s > 0:
            raise ValueError("fixed stepsize must be positive")


@dataclass
class PathMetrics:
    t_p: float = 0.0
    t_c: float = 0.0
    path_len: float = math.nan
    dev_opt: float = math.nan
    kappa: float = math.nan
    vertices: int = 0
    success: int = 0


@dataclass
class PathResult:
    joint_path: np.ndarray
    ee_polyline: np.ndarray
    metrics: PathMetrics
    smoothed: np.ndarray | None = None
    smoothed_ee: np.ndarray | None = None
    cost: float = math.nan  # accumulated joint-space length (search planners)
    info: dict = field(default_factory=dict)


def polyline_length(points) -> float:
    p = np.asarray(points, float)
    if len(p) < 2:
        return 0.0
    return float(np.linalg.norm(np.diff(p, axis=0), axis=1).sum())


def mean_turning_angle(points) -> float:
    """Mean absolute angle between successive non-degenerate segments."""
    p = np.asarray(points, float)
    seg = np.diff(p, axis=0) if len(p) > 1 else np.empty((0, 3))
    norms = np.linalg.norm(seg, axis=1)
    seg = seg[norms > 1e-12] / norms[norms > 1e-12, None]
    if len(seg) < 2:
        return 0.0
    cos = np.clip(np.sum(seg[1:] * seg[:-1], axis=1), -1.0, 1.0)
    return float(np.mean(np.arccos(cos)))


def path_ratio(ee, start_ee, goal_ee) -> float:
    chord = float(np.linalg.norm(np.asarray(goal_ee) - np.asarray(start_ee)))
    length = polyline_length(ee)
    if chord < 1e-12:
        return 1.0
    return length / chord


class StepRule:
    """Workspace stepsize at a configuration, and its joint-space equivalent."""

    def __init__(self, model: ManipulatorModel, cfg: PlannerConfig, tree: ASDTree | None):
        if cfg.stepsize == "adaptive" and tree is None:
            raise ValueError("adaptive stepsize needs an ASD tree")
        if not model.r_max > 0:
            raise ValueError("planning needs a manipulator with positive reach")
        self.model = model
        self.tree = tree if cfg.stepsize == "adaptive" else None
        self.s_fixed = cfg.s
        self.s_min = tree.s_min if self.tree is not None else cfg.s
        self.dq_min = self.s_min / model.r_max
        self.radii = model.sweep_radii
        if self.tree is not None:
            lo = np.asarray(self.tree.root.region.lo, float)
            hi = np.asarray(self.tree.root.region.hi, float)
            self._lo, self._hi = lo, np.nextafter(hi, -np.inf)

    def workspace_step(self, q) -> float:
        if self.tree is None:
            return self.s_fixed
        # the end effector may leave the map; use the nearest map cell then
        p = np.clip(end_effector(self.model, q), self._lo, self._hi)
        return stepsize_at(self.tree, p)

    def joint_step(self, q) -> float:
        return self.workspace_step(q) / self.model.r_max

    def units(self, q) -> int:
        """Joint step as a whole number of finest steps."""
        return max(1, int(round(self.workspace_step(q) / self.s_min)))


class _Budget:
    def __init__(self, cfg: PlannerConfig):
        self.t0 = time.perf_counter()
        self.budget = cfg.budget
        self.max_iter = cfg.max_iter
        self.iterations = 0

    def exhausted(self) -> bool:
        self.iterations += 1
        if self.max_iter is not None and self.iterations > self.max_iter:
            return True
        return time.perf_counter() - self.t0 > self.budget

    @property
    def elapsed(self) -> float:
        return time.perf_counter() - self.t0


def segment_free(check, a, b, resolution: float) -> bool:
    """Collision-check the straight joint-space segment at ``resolution`` (inf-norm)."""
    a, b = np.asarray(a, float), np.asarray(b, float)
    steps = max(1, int(math.ceil(float(np.max(np.abs(b - a))) / resolution - 1e-9)))
    for t in np.linspace(0.0, 1.0, steps + 1)[1:]:
        if check(a + t * (b - a)):
            return False
    return True


def swept_free(check, a, b, radii, tol: float = SWEEP_TOL) -> bool:
    """Certify every configuration on the straight joint-space segment [a, b].

    ``radii[j, i]`` bounds how far a point of link i can be from joint j's
    axis, so along the segment that link sweeps at most ``|b - a| @ radii``.
    One check at the midpoint with each link inflated by half of its sweep
    covers the whole segment. Failing halves are bisected; once every
    inflation is below ``tol`` a touching segment is rejected.
    """
    stack = [(np.asarray(a, float), np.asarray(b, float))]
    while stack:
        lo, hi = stack.pop()
        mid = 0.5 * (lo + hi)
        margins = 0.5 * (np.abs(hi - lo) @ radii)
        if not check(mid, margins):
            continue
        if margins.max() <= tol:
            return False
        stack += [(mid, hi), (lo, mid)]
    return True


def _subdivide(a, b, max_len: float) -> list[np.ndarray]:
    """Points after ``a`` up to ``b`` with consecutive L2 distance <= max_len."""
    a, b = np.asarray(a, float), np.asarray(b, float)
    k = max(1, int(math.ceil(float(np.linalg.norm(b - a)) / max_len - 1e-9)))
    return [a + (b - a) * (i / k) for i in range(1, k + 1)]


# -- lattice search ------------------------------------------------------------


class _Lattice:
    def __init__(self, model, check, rule: StepRule, q_start):
        self.model = model
        self.check = check
        self.rule = rule
        self.q0 = np.asarray(q_start, float)
        self.radii = rule.radii
        # worst joint per link, so one ball per node serves every axis move
        self.link_radii = rule.radii.max(axis=0)
        self.nodes: dict[tuple, bool] = {}
        self.edges: dict[tuple, bool] = {}
        self.balls: dict[tuple, bool] = {}
        self._units: dict[tuple, int] = {}

    def config(self, key) -> np.ndarray:
        return self.q0 + np.asarray(key, float) * self.rule.dq_min

    def units(self, key) -> int:
        k = self._units.get(key)
        if k is None:
            k = self._units[key] = self.rule.units(self.config(key))
        return k

    def blocked(self, key) -> bool:
        hit = self.nodes.get(key)
        if hit is None:
            q = self.config(key)
            hit = self.nodes[key] = (not self.model.within_limits(q)) or self.check(q)
        return hit

    def clear(self, key, units: int) -> bool:
        """Whether moving any one joint by up to ``units / 2`` finest steps from ``key`` stays free."""
        ok = self.balls.get((key, units))
        if ok is None:
            q = self.config(key)
            if not self.model.within_limits(q) or self.nodes.get(key):
                ok = False
            else:
                ok = not self.check(q, 0.5 * units * self.rule.dq_min * self.link_radii)
            self.balls[(key, units)] = ok
        return ok

    def move_free(self, key, j, target) -> bool:
        nxt = key[:j] + (target,) + key[j + 1:]
        if not self.clear(nxt, abs(target - key[j])) and self.blocked(nxt):
            return False
        return self._span_free(key, j, min(key[j], target), max(key[j], target))

    def _span_free(self, key, j, a, b) -> bool:
        # two free balls of half the span cover it; otherwise split at the
        # middle lattice point, and bisect in joint space below one step
        pa, pb = key[:j] + (a,) + key[j + 1:], key[:j] + (b,) + key[j + 1:]
        units = b - a
        if self.clear(pa, units) and self.clear(pb, units):
            return True
        if units == 1:
            ok = self.edges.get((pa, pb))
            if ok is None:
                ok = self.blocked(pa) is False and self.blocked(pb) is False and swept_free(
                    self.check, self.config(pa), self.config(pb), self.radii
                )
                self.edges[(pa, pb)] = ok
            return ok
        m = (a + b) // 2
        return self._span_free(key, j, m, b) and self._span_free(key, j, a, m)

    def successors(self, key):
        """Axis moves to the next multiple of the local step.

        Snapping keeps coarse regions on a coarse sub-lattice instead of
        inheriting every fine offset a path entered them with.
        """
        k = self.units(key)
        for j in range(self.model.n):
            for target in ((key[j] // k + 1) * k, (-(-key[j] // k) - 1) * k):
                if self.move_free(key, j, target):
                    yield key[:j] + (target,) + key[j + 1:], abs(target - key[j]) * self.rule.dq_min


def _lattice_search(model, check, rule, q_start, q_goal, cfg: PlannerConfig, budget: _Budget):
    """Best-first lattice search; returns (path, cost, expanded, failure reason)."""
    lat = _Lattice(model, check, rule, q_start)
    goal = np.asarray(q_goal, float)
    weight_g = 0.0 if cfg.algorithm == "greedy" else 1.0
    weight_h = 0.0 if cfg.algorithm == "ucs" else 1.0
    start = (0,) * model.n
    GOAL = "goal"

    def h(q):
        return float(np.linalg.norm(q - goal))

    best_g = {start: 0.0}
    parent: dict = {start: None}
    closed = set()
    h0 = h(lat.q0)
    # ties prefer the node closer to the goal, then the lower key
    heap = [(weight_h * h0, h0, 0, start)]
    expanded = 0
    while heap:
        if budget.exhausted():
            return None, math.nan, expanded, "budget"
        _, hq, _, key = heapq.heappop(heap)
        if key in closed:
            continue
        if key == GOAL:
            path = []
            k = parent[GOAL]
            while k is not None:
                path.append(lat.config(k))
                k = parent[k]
            path.reverse()
            return path, best_g[GOAL], expanded, None
        closed.add(key)
        expanded += 1
        q = lat.config(key)
        g = best_g[key]
        if float(np.max(np.abs(q - goal))) <= max(lat.units(key) * rule.dq_min, cfg.goal_tol):
            if np.allclose(q, goal, atol=1e-12, rtol=0) or swept_free(check, q, goal, lat.radii):
                g2 = g + h(q)
                if g2 < best_g.get(GOAL, math.inf):
                    best_g[GOAL] = g2
                    parent[GOAL] = key
                    heapq.heappush(heap, (weight_g * g2, 0.0, 1, GOAL))
        for nxt, step in lat.successors(key):
            if nxt in closed:
                continue
            g2 = g + step
            if weight_g == 0.0 and nxt in best_g:
                continue  # greedy: first discovery wins, no reopening
            if g2 < best_g.get(nxt, math.inf):
                best_g[nxt] = g2
                parent[nxt] = key
                qn = lat.config(nxt)
                hn = h(qn)
                heapq.heappush(heap, (weight_g * g2 + weight_h * hn, hn, 0, nxt))
    return None, math.nan, expanded, "exhausted"


# -- sampling-based --------------------------------------------------------------


class _Tree:
    def __init__(self, root, n):
        self.nodes = np.empty((64, n))
        self.nodes[0] = root
        self.parent = [-1]
        self.size = 1

    def add(self, q, parent: int) -> int:
        if self.size == len(self.nodes):
            self.nodes = np.concatenate([self.nodes, np.empty_like(self.nodes)])
        self.nodes[self.size] = q
        self.parent.append(parent)
        self.size += 1
        return self.size - 1

    def nearest(self, q) -> int:
        d = np.sum((self.nodes[: self.size] - q) ** 2, axis=1)
        return int(np.argmin(d))

    def path_to(self, i: int) -> list[np.ndarray]:
        out = []
        while i >= 0:
            out.append(self.nodes[i].copy())
            i = self.parent[i]
        out.reverse()
        return out


def _steer(q_near, q_target, dq):
    d = q_target - q_near
    dist = float(np.linalg.norm(d))
    if dist <= dq:
        return np.array(q_target, float)
    return q_near + d * (dq / dist)


def _extend(tree: _Tree, target, check, rule: StepRule):
    """One extension step; returns (new index, reached target) or (None, False)."""
    i = tree.nearest(target)
    q_near = tree.nodes[i]
    q_new = _steer(q_near, target, rule.joint_step(q_near))
    if not rule.model.within_limits(q_new) or not swept_free(check, q_near, q_new, rule.radii):
        return None, False
    j = tree.add(q_new, i)
    return j, bool(np.array_equal(q_new, target))


def _sample(rng, model):
    u = rng.random()
    q_rand = rng.uniform(model.limits[:, 0], model.limits[:, 1])
    return u, q_rand


def _rrt(model, check, rule, q_start, q_goal, cfg, budget, rng):
    tree = _Tree(q_start, model.n)
    goal = np.asarray(q_goal, float)
    while not budget.exhausted():
        u, q_rand = _sample(rng, model)
        if u < cfg.goal_bias:
            q_rand = goal
        j, _ = _extend(tree, q_rand, check, rule)
        if j is None:
            continue
        q_new = tree.nodes[j]
        if float(np.linalg.norm(q_new - goal)) <= cfg.goal_tol:
            path = tree.path_to(j)
            if not np.array_equal(q_new, goal):
                if not swept_free(check, q_new, goal, rule.radii):
                    continue
                path.append(goal.copy())
            return path, tree.size
    return None, tree.size


def _birrt(model, check, rule, q_start, q_goal, cfg, budget, rng):
    ta, tb = _Tree(q_start, model.n), _Tree(q_goal, model.n)
    a_is_start = True
    while not budget.exhausted():
        u, q_rand = _sample(rng, model)
        if u < cfg.goal_bias:
            q_rand = tb.nodes[0].copy()
        j, _ = _extend(ta, q_rand, check, rule)
        if j is not None:
            target = ta.nodes[j].copy()
            # greedy connect of the other tree
            while True:
                k, reached = _extend(tb, target, check, rule)
                if k is None:
                    break
                if reached:
                    pa, pb = ta.path_to(j), tb.path_to(k)
                    path = pa + pb[::-1][1:]
                    if not a_is_start:
                        path = path[::-1]
                    return path, ta.size + tb.size
                if budget.exhausted():
                    return None, ta.size + tb.size
        ta, tb = tb, ta
        a_is_start = not a_is_start
    return None, ta.size + tb.size


# -- entry point ---------------------------------------------------------------------


def plan(
    model: ManipulatorModel,
    vmap: ProbabilisticVoxelMap,
    tree: ASDTree | None,
    q_start,
    q_goal,
    cfg: PlannerConfig,
    checker: CollisionChecker | None = None,
) -> PathResult:
    q_start = np.asarray(q_start, float)
    q_goal = np.asarray(q_goal, float)
    check = checker or CollisionChecker(model, vmap)
    for q, err in ((q_start, InvalidStart), (q_goal, InvalidGoal)):
        if len(q) != model.n:
            raise err(f"configuration has {len(q)} joints, model has {model.n}")
        if not model.within_limits(q):
            raise err(f"configuration {q.tolist()} outside joint limits")
        if check(q):
            raise err(f"configuration {q.tolist()} is in collision")
    rule = StepRule(model, cfg, tree)
    budget = _Budget(cfg)
    t_c0 = check.t_c
    cost = math.nan
    reason = None
    if np.array_equal(q_start, q_goal):
        path, vertices, cost = [q_start.copy()], 1, 0.0
    elif cfg.algorithm in ("greedy", "astar", "ucs"):
        path, cost, vertices, reason = _lattice_search(model, check, rule, q_start, q_goal, cfg, budget)
        if path is not None:
            # the final hop to the exact goal is split into steps of at most one joint step
            path = path + _subdivide(path[-1], q_goal, rule.joint_step(path[-1]))
    else:
        rng = np.random.default_rng(cfg.seed)
        solver = _rrt if cfg.algorithm == "rrt" else _birrt
        path, vertices = solver(model, check, rule, q_start, q_goal, cfg, budget, rng)
        reason = None if path is not None else "budget"
    metrics = PathMetrics(t_p=budget.elapsed, t_c=check.t_c - t_c0, vertices=int(vertices))
    if path is None:
        return PathResult(np.empty((0, model.n)), np.empty((0, 3)), metrics, cost=cost, info={"reason": reason})
    joint_path = np.array(path).reshape(-1, model.n)
    ee = ee_polyline(model, joint_path)
    metrics.success = 1
    metrics.path_len = polyline_length(ee)
    metrics.dev_opt = path_ratio(ee, end_effector(model, q_start), end_effector(model, q_goal))
    metrics.kappa = mean_turning_angle(ee)
    return PathResult(joint_path, ee, metrics, cost=cost)
