"""Bundled planning scenarios: maps, arms and start/goal queries."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .pathplan.kinematics import ManipulatorModel
from .worldmap import OCCUPIED, ASDConfig, ASDTree, ProbabilisticVoxelMap, build_asd


@dataclass
class Scenario:
    name: str
    model: ManipulatorModel
    vmap: ProbabilisticVoxelMap
    q_start: np.ndarray
    q_goal: np.ndarray
    asd: ASDConfig

    def tree(self) -> ASDTree:
        return build_asd(self.vmap, self.asd)


def arm_3r(link_radius: float = 0.02) -> ManipulatorModel:
    """Yaw-pitch-pitch arm: shoulder 0.3 m above the base, links of 0.4 m and 0.35 m."""
    return ManipulatorModel.from_dh(
        [[0.0, math.pi / 2, 0.3, 0.0], [0.4, 0.0, 0.0, 0.0], [0.35, 0.0, 0.0, 0.0]],
        link_radius=link_radius,
    )


def arm_2r(l1: float = 0.35, l2: float = 0.35, link_radius: float = 0.01) -> ManipulatorModel:
    return ManipulatorModel.from_dh([[l1, 0.0, 0.0, 0.0], [l2, 0.0, 0.0, 0.0]], link_radius=link_radius)


def ik_3r(x: float, y: float, z: float) -> np.ndarray:
    """Elbow-up solution for :func:`arm_3r`."""
    q1 = math.atan2(y, x)
    r, h = math.hypot(x, y), z - 0.3
    c3 = (r * r + h * h - 0.4**2 - 0.35**2) / (2 * 0.4 * 0.35)
    q3 = -math.acos(c3)
    q2 = math.atan2(h, r) - math.atan2(0.35 * math.sin(q3), 0.4 + 0.35 * math.cos(q3))
    return np.array([q1, q2, q3])


def _bin(vmap, cx, cy, width, height, wall):
    x0, x1, y0, y1 = cx - width / 2, cx + width / 2, cy - width / 2, cy + width / 2
    vmap.fill_box((x0, y0, 0), (x1, y0 + wall, height))
    vmap.fill_box((x0, y1 - wall, 0), (x1, y1, height))
    vmap.fill_box((x0, y0, 0), (x0 + wall, y1, height))
    vmap.fill_box((x1 - wall, y0, 0), (x1, y1, height))
    vmap.fill_box((x0, y0, 0), (x1, y1, wall))


def cluttered_scenario() -> Scenario:
    """Bin picking: two bins on a table with a post between them."""
    res = 0.05
    vmap = ProbabilisticVoxelMap.empty(
        (round(0.96 / res), round(1.28 / res), round(0.8 / res)), res, origin=(-0.16, -0.64, 0.0)
    )
    vmap.fill_box((0.24, -0.64, 0.0), (0.8, 0.64, 0.04))
    _bin(vmap, 0.48, 0.32, 0.32, 0.2, res)
    _bin(vmap, 0.48, -0.32, 0.32, 0.2, res)
    vmap.fill_box((0.40, -0.08, 0.0), (0.64, 0.08, 0.45))
    return Scenario(
        "cluttered",
        arm_3r(),
        vmap,
        ik_3r(0.48, 0.32, 0.35),
        ik_3r(0.48, -0.32, 0.35),
        ASDConfig(s_max=0.2),
    )


def narrow_gap_scenario() -> Scenario:
    """Planar arm reaching out through a slot in a ring-shaped wall.

    The slot (0.12 m) is wider than the depth-2 step and narrower than the
    largest step, and the start sits one and a half coarse joint steps off
    the slot axis so the coarse lattice straddles it.
    """
    res = 0.02
    model = arm_2r()
    n = round(1.6 / res)
    vmap = ProbabilisticVoxelMap.empty((n, n, 3), res, origin=(-0.8, -0.8, -0.03))
    idx = np.indices(vmap.dims).reshape(3, -1).T
    c = vmap.voxel_centers(idx)
    r = np.hypot(c[:, 0], c[:, 1])
    slot = (np.abs(c[:, 1]) < 0.06) & (c[:, 0] > 0)
    wall = (r >= 0.48) & (r < 0.54) & ~slot
    vmap.states[tuple(idx[wall].T)] = OCCUPIED
    vmap.invalidate()
    asd = ASDConfig(s_max=0.2)
    coarse = asd.s_max / model.r_max
    return Scenario("narrow_gap", model, vmap, np.array([1.5 * coarse, 2.2]), np.array([0.0, 0.0]), asd)


def corridor_scenario() -> Scenario:
    """Single-joint sweep between two walls that stay clear of the arm."""
    res = 0.02
    model = arm_2r()
    n = round(1.6 / res)
    vmap = ProbabilisticVoxelMap.empty((n, n, 3), res, origin=(-0.8, -0.8, -0.03))
    idx = np.indices(vmap.dims).reshape(3, -1).T
    c = vmap.voxel_centers(idx)
    r = np.hypot(c[:, 0], c[:, 1])
    ang = np.arctan2(c[:, 1], c[:, 0])
    outer = (r >= 0.76) & (r < 0.8) & (ang > -0.3) & (ang < 1.1)
    sides = (r >= 0.3) & (r < 0.8) & (((ang > -0.3) & (ang < -0.2)) | ((ang > 1.0) & (ang < 1.1)))
    walls = outer | sides
    vmap.states[tuple(idx[walls].T)] = OCCUPIED
    vmap.invalidate()
    return Scenario("corridor", model, vmap, np.array([0.0, 0.0]), np.array([0.8, 0.0]), ASDConfig(s_max=0.2))


SCENARIOS = {
    "cluttered": cluttered_scenario,
    "narrow_gap": narrow_gap_scenario,
    "corridor": corridor_scenario,
}


def load_scenario(name: str) -> Scenario:
    try:
        return SCENARIOS[name]()
    except KeyError:
        raise ValueError(f"unknown scenario {name!r}; choose from {sorted(SCENARIOS)}") from None
