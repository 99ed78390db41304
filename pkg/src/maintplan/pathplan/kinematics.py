"""Denavit-Hartenberg serial chains of revolute joints and their link shapes."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..errors import DimensionMismatch, SchemaError


def dh_matrix(a: float, alpha: float, d: float, theta: float) -> np.ndarray:
    """Homogeneous transform Rz(theta) Tz(d) Tx(a) Rx(alpha)."""
    ct, st = math.cos(theta), math.sin(theta)
    ca, sa = math.cos(alpha), math.sin(alpha)
    return np.array(
        [
            [ct, -st * ca, st * sa, a * ct],
            [st, ct * ca, -ct * sa, a * st],
            [0.0, sa, ca, d],
            [0.0, 0.0, 0.0, 1.0],
        ]
    )


def _orthonormal_frame(axis: np.ndarray) -> np.ndarray:
    """Rotation whose first column is ``axis``."""
    x = axis / np.linalg.norm(axis)
    helper = np.array([0.0, 0.0, 1.0]) if abs(x[2]) < 0.9 else np.array([1.0, 0.0, 0.0])
    y = np.cross(helper, x)
    y /= np.linalg.norm(y)
    return np.column_stack([x, y, np.cross(x, y)])


@dataclass(frozen=True)
class LinkShape:
    """Collision shape of one link, expressed in that link's DH frame."""

    obb_center: np.ndarray
    obb_rotation: np.ndarray
    obb_half: np.ndarray
    sphere_center: np.ndarray
    sphere_radius: float

    @classmethod
    def around_segment(cls, p0, p1, radius: float) -> "LinkShape":
        p0, p1 = np.asarray(p0, float), np.asarray(p1, float)
        seg = p1 - p0
        length = float(np.linalg.norm(seg))
        if length < 1e-12:
            rot = np.eye(3)
            half = np.full(3, radius)
        else:
            rot = _orthonormal_frame(seg)
            half = np.array([0.5 * length + radius, radius, radius])
        center = 0.5 * (p0 + p1)
        return cls(center, rot, half, center, float(np.linalg.norm(half)))


@dataclass
class ManipulatorModel:
    dh: np.ndarray  # rows (a, alpha, d, theta_offset)
    limits: np.ndarray  # rows (lo, hi)
    links: list[LinkShape]
    base: np.ndarray = field(default_factory=lambda: np.eye(4))
    r_max: float | None = None

    def __post_init__(self):
        self.dh = np.atleast_2d(np.asarray(self.dh, float))
        self.limits = np.atleast_2d(np.asarray(self.limits, float))
        self.base = np.asarray(self.base, float)
        if self.dh.shape[1] != 4 or len(self.dh) < 1:
            raise ValueError("dh needs one (a, alpha, d, theta_offset) row per joint")
        if self.limits.shape != (self.n, 2) or (self.limits[:, 0] >= self.limits[:, 1]).any():
            raise ValueError("each joint needs a non-empty (lo, hi) limit")
        if len(self.links) != self.n:
            raise ValueError("one link shape per joint required")
        if self.r_max is None:
            # upper bound on any joint-axis-to-end-effector distance
            self.r_max = float(np.sum(np.hypot(self.dh[:, 0], self.dh[:, 2])))
        if not self.r_max >= 0:
            raise ValueError("reach must be non-negative")

    @property
    def n(self) -> int:
        return len(self.dh)

    @classmethod
    def from_dh(cls, dh, limits=None, link_radius: float = 0.02, base=None, r_max=None):
        """Build a model whose link shapes wrap the segment between frame origins."""
        dh = np.atleast_2d(np.asarray(dh, float))
        if limits is None:
            limits = [(-math.pi, math.pi)] * len(dh)
        links = []
        for a, alpha, d, _ in dh:
            # origin of the previous frame, seen from this link's frame (independent of theta)
            prev = np.array([-a, -d * math.sin(alpha), -d * math.cos(alpha)])
            links.append(LinkShape.around_segment(prev, np.zeros(3), link_radius))
        return cls(dh, np.asarray(limits, float), links, np.eye(4) if base is None else np.asarray(base, float), r_max)

    @property
    def sweep_radii(self) -> np.ndarray:
        """(joint, link) upper bounds on the distance from a joint axis to any point of a link.

        Joint j moves links j.. only. A link corner lies within the chain
        length from every upstream joint origin to the nearer end of its
        segment, plus its distance to that end; by convexity the corners
        bound the whole box.
        """
        hops = np.hypot(self.dh[:, 0], self.dh[:, 2])
        radii = np.zeros((self.n, self.n))
        signs = np.array(np.meshgrid([-1, 1], [-1, 1], [-1, 1], indexing="ij")).reshape(3, -1).T
        for i, ((a, alpha, d, _), shape) in enumerate(zip(self.dh, self.links)):
            prev = np.array([-a, -d * math.sin(alpha), -d * math.cos(alpha)])
            corners = shape.obb_center + (signs * shape.obb_half) @ shape.obb_rotation.T
            to_end = np.linalg.norm(corners, axis=1)
            to_start = np.linalg.norm(corners - prev, axis=1)
            for j in range(i + 1):
                # joint j turns about an axis through frame j-1's origin
                upstream = float(hops[j:i].sum())
                radii[j, i] = float(np.minimum(to_start + upstream, to_end + upstream + hops[i]).max())
        return radii

    def within_limits(self, q) -> bool:
        q = np.asarray(q, float)
        return bool(((q >= self.limits[:, 0] - 1e-12) & (q <= self.limits[:, 1] + 1e-12)).all())


def forward_kinematics(model: ManipulatorModel, q) -> list[np.ndarray]:
    """World transforms of frames 1..n; the last one is the end-effector pose."""
    q = np.asarray(q, float).ravel()
    if len(q) != model.n:
        raise DimensionMismatch(f"configuration has {len(q)} joints, model has {model.n}")
    frames = []
    T = model.base
    for (a, alpha, d, offset), theta in zip(model.dh, q):
        T = T @ dh_matrix(a, alpha, d, theta + offset)
        frames.append(T)
    return frames


def end_effector(model: ManipulatorModel, q) -> np.ndarray:
    return forward_kinematics(model, q)[-1][:3, 3].copy()


def ee_polyline(model: ManipulatorModel, path) -> np.ndarray:
    return np.array([end_effector(model, q) for q in path]).reshape(-1, 3)


def model_from_dict(doc) -> ManipulatorModel:
    try:
        dh = [[float(r["a"]), float(r["alpha"]), float(r["d"]), float(r.get("theta_offset", 0.0))] for r in doc["dh"]]
        limits = doc.get("limits")
        base = np.eye(4)
        if "base" in doc:
            base[:3, 3] = [float(v) for v in doc["base"]]
        return ManipulatorModel.from_dh(
            dh, limits, float(doc.get("link_radius", 0.02)), base, doc.get("r_max")
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaError(f"invalid robot description: {exc}") from None


def load_model(path) -> ManipulatorModel:
    return model_from_dict(json.loads(Path(path).read_text(encoding="utf-8")))
