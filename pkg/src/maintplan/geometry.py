"""Small geometric predicates against axis-aligned voxel cubes (vectorized
over the cubes)."""

from __future__ import annotations

import numpy as np

_EPS = 1e-12
_EYE = np.eye(3)
# _SKEW[i] @ v == e_i x v
_SKEW = np.array([[[0, 0, 0], [0, 0, -1], [0, 1, 0]], [[0, 0, 1], [0, 0, 0], [-1, 0, 0]], [[0, -1, 0], [1, 0, 0], [0, 0, 0]]], float)


def point_box_distance(p, lo, hi) -> np.ndarray:
    """Euclidean distance from point(s) ``p`` to boxes [lo, hi]."""
    d = np.maximum(np.maximum(lo - p, 0.0), p - hi)
    return np.sqrt(np.sum(d * d, axis=-1))


def sphere_box_overlap(center, radius, lo, hi) -> np.ndarray:
    return point_box_distance(np.asarray(center), lo, hi) <= radius


def segment_box_distance(a, b, lo, hi, iters: int = 60) -> np.ndarray:
    """Distance from segment [a, b] to each box [lo, hi].

    The distance along the segment is convex in the parameter, so a
    golden-section search brackets the minimum.
    """
    a = np.asarray(a, float)
    b = np.asarray(b, float)
    lo = np.atleast_2d(lo)
    hi = np.atleast_2d(hi)
    m = len(lo)
    inv_phi = (np.sqrt(5.0) - 1.0) / 2.0

    def dist(t):
        return point_box_distance(a + t[:, None] * (b - a), lo, hi)

    left, right = np.zeros(m), np.ones(m)
    for _ in range(iters):
        x1 = right - inv_phi * (right - left)
        x2 = left + inv_phi * (right - left)
        keep_left = dist(x1) <= dist(x2)
        right = np.where(keep_left, x2, right)
        left = np.where(keep_left, left, x1)
    best = dist(0.5 * (left + right))
    return np.minimum(best, np.minimum(dist(np.zeros(m)), dist(np.ones(m))))


def obb_box_overlap(center, axes, half, box_center, box_half) -> np.ndarray:
    """Separating-axis test of one oriented box against many axis-aligned cubes.

    ``axes`` holds the OBB's unit axes as columns; touching counts as overlap.
    ``box_half`` is a scalar or one half-extent row per cube.
    """
    c = np.asarray(center, float)
    A = np.asarray(axes, float)
    h = np.asarray(half, float)
    t = np.atleast_2d(box_center) - c  # (m, 3)
    # candidate axes: 3 world axes, 3 OBB axes, 9 cross products e_i x a_k
    cross = (_SKEW @ A).transpose(0, 2, 1).reshape(9, 3)
    norms = np.sqrt(np.einsum("ij,ij->i", cross, cross))
    keep = norms > 1e-9
    L = np.concatenate([_EYE, A.T, cross[keep] / norms[keep, None]])  # (k, 3)
    absL = np.abs(L)
    r_obb = np.abs(L @ A) @ h  # (k,)
    bh = np.asarray(box_half, float)
    r_box = bh * absL.sum(axis=1) if bh.ndim == 0 else np.atleast_2d(bh) @ absL.T
    separated = np.abs(t @ L.T) > r_obb + r_box + _EPS
    return ~separated.any(axis=1)
