import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from maintplan.pathplan import CollisionChecker, PathMetrics, PathResult, PlannerConfig, plan, smooth_path
from maintplan.pathplan.kinematics import ee_polyline
from maintplan.pathplan.planners import mean_turning_angle
from maintplan.pathplan.smoothing import bernstein3, control_points
from maintplan.scenarios import arm_2r, narrow_gap_scenario
from maintplan.worldmap import ProbabilisticVoxelMap

MODEL = arm_2r()
OPEN = ProbabilisticVoxelMap.empty((4, 4, 1), 0.5, origin=(-1.0, -1.0, -0.25))


def result(waypoints):
    w = np.asarray(waypoints, float)
    ee = ee_polyline(MODEL, w)
    return PathResult(w, ee, PathMetrics(success=1, kappa=mean_turning_angle(ee)))


def test_bernstein_partition_of_unity():
    t = np.linspace(0, 1, 101)
    B = bernstein3(t)
    assert np.allclose(B.sum(axis=1), 1.0) and (B >= 0).all()


def test_control_points_interpolate():
    w = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [2.0, 1.5]])
    ctrl = control_points(w)
    assert len(ctrl) == 3
    for i, c in enumerate(ctrl):
        assert np.array_equal(c[0], w[i]) and np.array_equal(c[3], w[i + 1])


def test_two_waypoints_stay_straight():
    r = result([[0.0, 0.0], [0.4, 0.2]])
    s = smooth_path(r, MODEL, OPEN, 0.025)
    w = s.smoothed
    assert np.array_equal(w[0], r.joint_path[0]) and np.array_equal(w[-1], r.joint_path[-1])
    d = w - w[0]
    direction = (r.joint_path[1] - r.joint_path[0]) / np.linalg.norm(r.joint_path[1] - r.joint_path[0])
    assert np.allclose(d - np.outer(d @ direction, direction), 0.0, atol=1e-12)


def test_right_angle_is_rounded():
    r = result([[0.0, 0.5], [0.6, 0.5], [0.6, 1.1]])
    s = smooth_path(r, MODEL, OPEN, 0.025)
    assert s.info["kappa_smoothed"] < r.metrics.kappa
    assert np.array_equal(s.smoothed[0], r.joint_path[0])
    assert np.array_equal(s.smoothed[-1], r.joint_path[-1])


def test_failed_path_passes_through():
    r = PathResult(np.empty((0, 2)), np.empty((0, 3)), PathMetrics())
    assert len(smooth_path(r, MODEL, OPEN, 0.025).smoothed) == 0


def test_sample_spacing_bound():
    r = result([[0.0, 0.5], [0.6, 0.5], [0.6, 1.1], [1.4, -0.3]])
    s = smooth_path(r, MODEL, OPEN, 0.025)
    step = np.abs(np.diff(s.smoothed, axis=0)).sum(axis=1)
    assert step.max() <= 0.5 * 0.025 / MODEL.r_max + 1e-12


@settings(max_examples=25, deadline=None)
@given(st.lists(st.tuples(st.floats(-2.0, 2.0), st.floats(-2.0, 2.0)), min_size=3, max_size=6))
def test_smoothing_keeps_limits_and_endpoints(pts):
    r = result([[0.0, 0.0]] + [list(p) for p in pts])
    s = smooth_path(r, MODEL, OPEN, 0.05)
    assert all(MODEL.within_limits(q) for q in s.smoothed)
    assert np.array_equal(s.smoothed[-1], r.joint_path[-1])


def test_smoothed_narrow_gap_is_collision_free():
    sc = narrow_gap_scenario()
    tree = sc.tree()
    raw = plan(sc.model, sc.vmap, tree, sc.q_start, sc.q_goal, PlannerConfig("astar", "adaptive"))
    check = CollisionChecker(sc.model, sc.vmap)
    s = smooth_path(raw, sc.model, sc.vmap, tree.s_min, check)
    assert not any(check(q) for q in s.smoothed)
    assert s.info["kappa_smoothed"] <= raw.metrics.kappa
