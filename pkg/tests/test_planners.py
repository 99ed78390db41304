import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from maintplan.errors import InvalidGoal, InvalidStart
from maintplan.pathplan import CollisionChecker, PlannerConfig, end_effector, plan
from maintplan.pathplan.planners import mean_turning_angle, path_ratio, polyline_length, segment_free, swept_free
from maintplan.scenarios import arm_2r, corridor_scenario, narrow_gap_scenario
from maintplan.worldmap import OCCUPIED, ASDConfig, ProbabilisticVoxelMap, build_asd


@pytest.fixture(scope="module")
def corridor():
    sc = corridor_scenario()
    return sc, sc.tree()


@pytest.fixture(scope="module")
def gap():
    sc = narrow_gap_scenario()
    return sc, sc.tree()


def run(sc, tree, **kw):
    return plan(sc.model, sc.vmap, tree, sc.q_start, sc.q_goal, PlannerConfig(**kw))


def test_metric_helpers():
    pts = np.array([[0.0, 0, 0], [1.0, 0, 0], [1.0, 1, 0], [1.0, 1, 0]])
    assert polyline_length(pts) == 2.0
    assert mean_turning_angle(pts) == pytest.approx(math.pi / 2)
    assert path_ratio(pts, pts[0], pts[-1]) == pytest.approx(2 / math.sqrt(2))
    assert path_ratio(pts[:1], pts[0], pts[0]) == 1.0


def test_start_equals_goal(corridor):
    sc, tree = corridor
    res = plan(sc.model, sc.vmap, tree, sc.q_start, sc.q_start, PlannerConfig())
    m = res.metrics
    assert m.success == 1 and m.path_len == 0.0 and m.vertices <= 1 and m.dev_opt == 1.0


def test_corridor_straight(corridor):
    sc, tree = corridor
    res = run(sc, tree, algorithm="astar", stepsize="fixed", s=tree.s_min)
    assert res.metrics.success == 1
    assert 1.0 <= res.metrics.dev_opt <= 1.05
    assert np.allclose(res.joint_path[0], sc.q_start) and np.allclose(res.joint_path[-1], sc.q_goal)


def test_astar_cost_matches_uniform_cost_search(corridor, gap):
    for sc, tree in (corridor, gap):
        for stepsize in ("fixed", "adaptive"):
            a = run(sc, tree, algorithm="astar", stepsize=stepsize, s=tree.s_min)
            u = run(sc, tree, algorithm="ucs", stepsize=stepsize, s=tree.s_min)
            assert a.metrics.success == u.metrics.success == 1
            assert a.cost == pytest.approx(u.cost, rel=1e-12, abs=1e-12)
            assert a.metrics.vertices <= u.metrics.vertices


def test_narrow_gap_needs_small_steps(gap):
    sc, tree = gap
    for algorithm in ("greedy", "astar"):
        coarse = run(sc, tree, algorithm=algorithm, stepsize="fixed", s=tree.s_max)
        fine = run(sc, tree, algorithm=algorithm, stepsize="adaptive")
        assert coarse.metrics.success == 0
        assert fine.metrics.success == 1


def test_path_is_collision_free(gap):
    sc, tree = gap
    res = run(sc, tree, algorithm="astar", stepsize="adaptive")
    check = CollisionChecker(sc.model, sc.vmap)
    # edges are swept-volume certified, so a much denser re-check still passes
    resolution = 0.05 * tree.s_min / sc.model.r_max
    for a, b in zip(res.joint_path, res.joint_path[1:]):
        assert segment_free(check, a, b, resolution)


def test_search_is_deterministic(gap):
    sc, tree = gap
    a = run(sc, tree, algorithm="greedy", stepsize="adaptive")
    b = run(sc, tree, algorithm="greedy", stepsize="adaptive")
    assert np.array_equal(a.joint_path, b.joint_path) and a.metrics.vertices == b.metrics.vertices


@pytest.mark.parametrize("algorithm", ["rrt", "birrt"])
def test_sampling_deterministic_under_seed(corridor, algorithm):
    sc, tree = corridor
    a = run(sc, tree, algorithm=algorithm, stepsize="fixed", s=0.05, seed=3)
    b = run(sc, tree, algorithm=algorithm, stepsize="fixed", s=0.05, seed=3)
    assert a.metrics.success == 1
    assert np.array_equal(a.joint_path, b.joint_path)
    assert np.allclose(a.joint_path[-1], sc.q_goal)


def test_invalid_queries(corridor):
    sc, tree = corridor
    with pytest.raises(InvalidStart):
        plan(sc.model, sc.vmap, tree, [0.0], sc.q_goal, PlannerConfig())
    with pytest.raises(InvalidGoal):
        plan(sc.model, sc.vmap, tree, sc.q_start, [9.0, 0.0], PlannerConfig())
    with pytest.raises(InvalidGoal):
        # the wall at angle 1.05 rad
        plan(sc.model, sc.vmap, tree, sc.q_start, [1.05, 0.0], PlannerConfig())
    with pytest.raises(ValueError):
        PlannerConfig(algorithm="dfs")
    with pytest.raises(ValueError):
        run(sc, None, stepsize="adaptive")


def test_budget_exhaustion(gap):
    sc, tree = gap
    res = run(sc, tree, algorithm="astar", stepsize="fixed", s=tree.s_min, max_iter=5)
    assert res.metrics.success == 0 and len(res.joint_path) == 0
    assert res.info["reason"] == "budget"
    assert math.isnan(res.metrics.path_len)


def test_walled_off_goal_unreachable():
    model = arm_2r()
    vmap = ProbabilisticVoxelMap.empty((40, 40, 3), 0.04, origin=(-0.8, -0.8, -0.06))
    # two half-line walls along +y and -y; the shoulder link cannot swing past either
    vmap.fill_box((-0.02, 0.06, -0.06), (0.02, 0.8, 0.06))
    vmap.fill_box((-0.02, -0.8, -0.06), (0.02, -0.06, 0.06))
    tree = build_asd(vmap, ASDConfig())
    res = plan(model, vmap, tree, [0.0, 0.0], [math.pi, 0.0], PlannerConfig("astar", "fixed", 0.1, budget=30))
    assert res.metrics.success == 0
    assert res.info["reason"] == "exhausted"


@settings(max_examples=15, deadline=None)
@given(st.floats(-2.5, 2.5), st.floats(-2.5, 2.5), st.sampled_from(["greedy", "astar", "birrt"]))
def test_path_ratio_at_least_one(q1, q2, algorithm):
    model = arm_2r()
    vmap = ProbabilisticVoxelMap.empty((4, 4, 1), 0.5, origin=(-1.0, -1.0, -0.25))
    tree = build_asd(vmap, ASDConfig())
    res = plan(model, vmap, tree, [0.0, 0.0], [q1, q2], PlannerConfig(algorithm, "fixed", 0.1, seed=1))
    assert res.metrics.success == 1
    assert res.metrics.dev_opt >= 1.0 - 1e-9
    assert np.allclose(res.ee_polyline[-1], end_effector(model, [q1, q2]))


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6))
def test_swept_check_is_sound(seed):
    sc = narrow_gap_scenario()
    rng = np.random.default_rng(seed)
    check = CollisionChecker(sc.model, sc.vmap)
    a = rng.uniform(-2.5, 2.5, 2)
    b = a + rng.normal(scale=0.15, size=2)
    dense = segment_free(check, a, b, 2e-4)
    certified = swept_free(check, a, b, sc.model.sweep_radii)
    assert dense or not certified
