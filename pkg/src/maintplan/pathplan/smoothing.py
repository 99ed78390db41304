"""Cubic Bezier smoothing of joint-space waypoint paths."""

from __future__ import annotations

import math
from dataclasses import replace

import numpy as np

from .collision import CollisionChecker
from .kinematics import ManipulatorModel, ee_polyline
from .planners import PathResult, mean_turning_angle, swept_free


def bernstein3(t: np.ndarray) -> np.ndarray:
    """Cubic Bernstein basis evaluated at each parameter, shape (len(t), 4)."""
    t = np.asarray(t, float)[:, None]
    s = 1.0 - t
    return np.hstack([s**3, 3 * s * s * t, 3 * s * t * t, t**3])


def control_points(waypoints: np.ndarray) -> np.ndarray:
    """(m-1, 4, n) control polygons, C1 at the interior waypoints."""
    w = np.asarray(waypoints, float)
    tangents = np.empty_like(w)
    tangents[1:-1] = 0.5 * (w[2:] - w[:-2])
    tangents[0] = w[1] - w[0]
    tangents[-1] = w[-1] - w[-2]
    p0, p3 = w[:-1], w[1:]
    p1 = p0 + tangents[:-1] / 3.0
    p2 = p3 - tangents[1:] / 3.0
    return np.stack([p0, p1, p2, p3], axis=1)


def _samples_needed(length_l1_bound: float, dq: float) -> int:
    return max(1, int(math.ceil(length_l1_bound / dq - 1e-9)))


def smooth_path(
    result: PathResult,
    model: ManipulatorModel,
    vmap,
    s_min: float,
    checker: CollisionChecker | None = None,
) -> PathResult:
    """Smoothed copy of a successful path; never introduces a collision.

    Samples are spaced so the end effector moves at most ``s_min / 2``
    between them, and every span between consecutive samples is swept-volume
    certified. A curve that fails falls back to its straight segment, and to
    the bare waypoints if even that is blocked.
    """
    w = np.asarray(result.joint_path, float)
    if not result.metrics.success or len(w) < 2:
        return replace(result, smoothed=w.copy(), smoothed_ee=ee_polyline(model, w))
    check = checker or CollisionChecker(model, vmap)
    dq = 0.5 * s_min / model.r_max
    radii = model.sweep_radii

    def usable(start, points) -> bool:
        if not all(model.within_limits(q) for q in points):
            return False
        chain = [start, *points]
        return all(swept_free(check, a, b, radii) for a, b in zip(chain, chain[1:]))

    out = [w[0]]
    for i, ctrl in enumerate(control_points(w)):
        # |B'(t)| <= 3 max |P_{k+1} - P_k|, measured in the L1 norm
        k = _samples_needed(3.0 * float(np.abs(np.diff(ctrl, axis=0)).sum(axis=1).max()), dq)
        t = np.linspace(0.0, 1.0, k + 1)[1:]
        pts = bernstein3(t) @ ctrl
        pts[-1] = w[i + 1]
        if not usable(w[i], pts):
            k = _samples_needed(float(np.abs(w[i + 1] - w[i]).sum()), dq)
            t = np.linspace(0.0, 1.0, k + 1)[1:]
            pts = w[i] + t[:, None] * (w[i + 1] - w[i])
            pts[-1] = w[i + 1]
            if not usable(w[i], pts):
                pts = w[i + 1][None, :]
        out.extend(pts)
    smoothed = np.array(out)
    smoothed[0], smoothed[-1] = w[0], w[-1]
    ee = ee_polyline(model, smoothed)
    info = dict(result.info, kappa_smoothed=mean_turning_angle(ee))
    return replace(result, smoothed=smoothed, smoothed_ee=ee, info=info)
