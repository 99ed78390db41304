"""Two-stage link-versus-voxel collision detection.

Stage one tests each link's enclosing sphere against obstacle cubes; only
links whose sphere touches an obstacle reach the separating-axis test of
stage two. Space outside the map is treated as free.
"""

from __future__ import annotations

import math
import time

import numpy as np

from ..geometry import obb_box_overlap, sphere_box_overlap
from ..worldmap import ProbabilisticVoxelMap
from .kinematics import ManipulatorModel, forward_kinematics


class _OccupancyIndex:
    """Summed-volume table over obstacle voxels for O(1) "any obstacle in box" queries."""

    def __init__(self, vmap: ProbabilisticVoxelMap):
        self.vmap = vmap
        self.origin = [float(v) for v in vmap.origin]
        self.res = float(vmap.resolution)
        self.dims = vmap.dims
        table = np.zeros(tuple(d + 1 for d in self.dims), np.int64)
        table[1:, 1:, 1:] = vmap.blocked.cumsum(0).cumsum(1).cumsum(2)
        self.table = table

    def index_range(self, lo, hi):
        first, stop = [], []
        for axis in range(3):
            a = math.floor((lo[axis] - self.origin[axis]) / self.res)
            b = math.floor((hi[axis] - self.origin[axis]) / self.res) + 1
            a, b = min(max(a, 0), self.dims[axis]), min(max(b, 0), self.dims[axis])
            if b <= a:
                return None
            first.append(a)
            stop.append(b)
        return first, stop

    def count(self, first, stop) -> int:
        t = self.table
        (x0, y0, z0), (x1, y1, z1) = first, stop
        return int(
            t[x1, y1, z1] - t[x0, y1, z1] - t[x1, y0, z1] - t[x1, y1, z0]
            + t[x0, y0, z1] + t[x0, y1, z0] + t[x1, y0, z0] - t[x0, y0, z0]
        )

    def candidates(self, lo, hi) -> np.ndarray:
        """Indices of obstacle voxels whose cube meets the box [lo, hi]."""
        rng = self.index_range(lo, hi)
        if rng is None or self.count(*rng) == 0:
            return np.empty((0, 3), int)
        (x0, y0, z0), (x1, y1, z1) = rng
        return np.argwhere(self.vmap.blocked[x0:x1, y0:y1, z0:z1]) + np.array([x0, y0, z0])


def link_poses(model: ManipulatorModel, q):
    """World (obb center, obb axes, half extents, sphere center, sphere radius) per link."""
    out = []
    for T, shape in zip(forward_kinematics(model, q), model.links):
        R, t = T[:3, :3], T[:3, 3]
        out.append(
            (
                R @ shape.obb_center + t,
                R @ shape.obb_rotation,
                shape.obb_half,
                R @ shape.sphere_center + t,
                shape.sphere_radius,
            )
        )
    return out


def link_collides(index: _OccupancyIndex, pose, two_stage: bool = True, margin: float = 0.0) -> bool:
    """Link against the occupied voxels, with the box grown by ``margin`` on every side."""
    center, axes, half, s_center, s_radius = pose
    if margin > 0.0:
        half = half + margin
        s_radius = s_radius + math.sqrt(3.0) * margin
    vmap = index.vmap
    res = vmap.resolution
    if two_stage:
        idx = index.candidates(s_center - s_radius, s_center + s_radius)
        if len(idx) == 0:
            return False
        lo = vmap.origin + idx * res
        near = sphere_box_overlap(s_center, s_radius, lo, lo + res)
        if not near.any():
            return False
        idx = idx[near]
    else:
        # narrow phase only, over the OBB's own bounding box
        reach = np.abs(axes) @ half
        idx = index.candidates(center - reach, center + reach)
        if len(idx) == 0:
            return False
    cubes = vmap.origin + (idx + 0.5) * res
    return bool(obb_box_overlap(center, axes, half, cubes, 0.5 * res).any())


class CollisionChecker:
    """Callable collision test that accumulates its own wall time in ``t_c``."""

    def __init__(self, model: ManipulatorModel, vmap: ProbabilisticVoxelMap, two_stage: bool = True):
        self.model = model
        self.vmap = vmap
        self.two_stage = two_stage
        self.index = _OccupancyIndex(vmap)
        self.t_c = 0.0
        self.calls = 0

    def __call__(self, q, margin=0.0) -> bool:
        """Collision test, optionally with each link grown by a (per-link) margin."""
        t0 = time.perf_counter()
        try:
            self.calls += 1
            margins = np.broadcast_to(np.asarray(margin, float), (self.model.n,))
            return any(
                link_collides(self.index, p, self.two_stage, float(m))
                for p, m in zip(link_poses(self.model, q), margins)
            )
        finally:
            self.t_c += time.perf_counter() - t0



def check_collision(model: ManipulatorModel, q, vmap: ProbabilisticVoxelMap, two_stage: bool = True) -> bool:
    """One-off query; build a :class:`CollisionChecker` for repeated ones."""
    return CollisionChecker(model, vmap, two_stage)(q)
