"""Sampling-based degree-of-freedom analysis.

Translational disassembly directions are approximated by a shared set of
unit vectors drawn with Marsaglia's rejection method. Every contact maps to
an index subset of that set, a component's disassembly space is the
intersection over its contacts, and the space is classified into one
symbolic degree of freedom.
"""

from __future__ import annotations

import csv
import enum
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

from .assembly import RelationalAssemblyModel, SSRelation
from .errors import MixedSpheres, UnsupportedGeometry


class SdofLabel(str, enum.Enum):
    FIX = "fix"
    LIN = "lin"
    ROT = "rot"
    FITS = "fits"
    AGPP = "agpp"
    FREE = "free"

    def __str__(self):
        return self.value

    @classmethod
    def parse(cls, text: str) -> "SdofLabel":
        # alternate spelling accepted on input
        if text == "aggp":
            text = "agpp"
        return cls(text)


REMOVABLE = frozenset({SdofLabel.LIN, SdofLabel.FITS, SdofLabel.AGPP, SdofLabel.FREE})


@dataclass(frozen=True)
class SdaConfig:
    n: int = 10000
    seed: int = 0
    theta_tol: float = 0.087
    gravity: tuple[float, float, float] = (0.0, 0.0, -1.0)

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("sample count must be positive")
        if not 0 < self.theta_tol < math.pi / 2:
            raise ValueError("theta_tol must lie in (0, pi/2)")
        g = np.asarray(self.gravity, dtype=float)
        if abs(np.linalg.norm(g) - 1.0) > 1e-9:
            raise ValueError("gravity must be a unit vector")

    @property
    def sphere(self) -> "SampleSphere":
        return marsaglia_sphere(self.n, self.seed)


@dataclass(frozen=True, eq=False)
class SampleSphere:
    points: np.ndarray
    n: int
    seed: int

    def full(self) -> "DisassemblySpace":
        return DisassemblySpace(np.arange(self.n, dtype=np.int64), self.n, self.seed)

    def empty(self) -> "DisassemblySpace":
        return DisassemblySpace(np.empty(0, dtype=np.int64), self.n, self.seed)


@lru_cache(maxsize=16)
def marsaglia_sphere(n: int, seed: int) -> SampleSphere:
    """Draw ``n`` points uniformly on the unit sphere.

    Pairs (w1, w2) uniform on (-1, 1)^2 are kept when w1^2 + w2^2 < 1 and
    mapped to (2 w1 r, 2 w2 r, 1 - 2 s) with s = w1^2 + w2^2, r = sqrt(1 - s).
    Rejection happens in batches so the result depends only on (n, seed).
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = np.random.default_rng(seed)
    chunks = []
    have = 0
    while have < n:
        batch = max(64, int((n - have) * 1.35))
        w = rng.uniform(-1.0, 1.0, size=(batch, 2))
        s = w[:, 0] ** 2 + w[:, 1] ** 2
        w, s = w[s < 1.0], s[s < 1.0]
        root = np.sqrt(1.0 - s)
        pts = np.column_stack((2 * w[:, 0] * root, 2 * w[:, 1] * root, 1.0 - 2.0 * s))
        chunks.append(pts)
        have += len(pts)
    points = np.concatenate(chunks)[:n]
    # the map is exactly norm-preserving up to rounding; renormalize the last ulp
    points /= np.linalg.norm(points, axis=1, keepdims=True)
    points.setflags(write=False)
    return SampleSphere(points, n, seed)


@dataclass(frozen=True, eq=False)
class DisassemblySpace:
    indices: np.ndarray
    n: int
    seed: int

    def __len__(self):
        return len(self.indices)

    def __eq__(self, other):
        return (
            isinstance(other, DisassemblySpace)
            and (self.n, self.seed) == (other.n, other.seed)
            and np.array_equal(self.indices, other.indices)
        )

    @property
    def fraction(self) -> float:
        return len(self.indices) / self.n

    @property
    def is_empty(self) -> bool:
        return len(self.indices) == 0

    @property
    def is_full(self) -> bool:
        return len(self.indices) == self.n

    def issubset(self, other: "DisassemblySpace") -> bool:
        return len(intersect_spaces([self, other])) == len(self)

    def directions(self) -> np.ndarray:
        return marsaglia_sphere(self.n, self.seed).points[self.indices]


def effective_direction(rel: SSRelation, as_seen_by: str) -> np.ndarray:
    e = np.asarray(rel.geometry.direction, dtype=float)
    if as_seen_by == rel.a:
        return e
    if as_seen_by == rel.b:
        return -e
    raise ValueError(f"{as_seen_by!r} is not an endpoint of relation {rel.id!r}")


def _constraint(rel: SSRelation, as_seen_by: str):
    """Return (kind, axes) describing a relation's admissible set.

    kind is "half" (closed half-space about one axis), "cones" (tolerance
    cones about the listed axes) or "none" (no translation admitted).
    """
    e = effective_direction(rel, as_seen_by)
    geo = rel.geometry.kind
    if rel.kind == "screwed":
        if geo == "line":
            return "none", ()
    elif rel.kind == "congruent":
        if geo == "plane":
            return "half", (e,)
        if geo == "line":
            return "cones", (e, -e)
        if geo == "point":
            return "half", (e,)
    elif rel.kind == "concentric":
        if geo in ("line", "circle"):
            return "cones", ((e, -e) if rel.through else (e,))
        if geo == "point":
            return "half", (e,)
    raise UnsupportedGeometry(f"{rel.kind} relation on a {geo} is not supported ({rel.id})")


def _margins(points: np.ndarray, rel: SSRelation, as_seen_by: str, theta_tol: float):
    """Angular margin of each direction inside the relation's admissible set.

    Non-negative exactly for admitted directions.
    """
    kind, axes = _constraint(rel, as_seen_by)
    if kind == "none":
        return np.full(len(points), -np.inf)
    if kind == "half":
        return np.arcsin(np.clip(points @ axes[0], -1.0, 1.0))
    ang = np.stack([np.arccos(np.clip(points @ ax, -1.0, 1.0)) for ax in axes])
    return theta_tol - ang.min(axis=0)


def subspace(rel: SSRelation, sphere: SampleSphere, cfg: SdaConfig, as_seen_by: str) -> DisassemblySpace:
    """Samples along which ``as_seen_by`` may translate away under ``rel``."""
    kind, axes = _constraint(rel, as_seen_by)
    pts = sphere.points
    if kind == "none":
        mask = np.zeros(sphere.n, dtype=bool)
    elif kind == "half":
        mask = pts @ axes[0] >= 0.0
    else:
        cos_tol = math.cos(cfg.theta_tol)
        mask = np.zeros(sphere.n, dtype=bool)
        for ax in axes:
            mask |= pts @ ax >= cos_tol
    return DisassemblySpace(np.flatnonzero(mask).astype(np.int64), sphere.n, sphere.seed)


def _intersect_sorted(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    # both inputs sorted and duplicate-free: merge, sort, keep adjacent equals
    merged = np.concatenate((x, y))
    merged.sort(kind="mergesort")
    return merged[:-1][merged[1:] == merged[:-1]]


def intersect_spaces(spaces: Sequence[DisassemblySpace]) -> DisassemblySpace:
    if not spaces:
        raise ValueError("intersect_spaces needs at least one space")
    first = spaces[0]
    for s in spaces[1:]:
        if (s.n, s.seed) != (first.n, first.seed):
            raise MixedSpheres(
                f"spaces from spheres (n={first.n}, seed={first.seed}) and (n={s.n}, seed={s.seed})"
            )
    out = first.indices
    for s in sorted(spaces[1:], key=len):
        if len(out) == 0:
            break
        out = _intersect_sorted(out, s.indices)
    return DisassemblySpace(out, first.n, first.seed)


def clearance(w: DisassemblySpace, incident: Sequence[SSRelation], cfg: SdaConfig, component: str):
    """Minimum angular margin over ``incident`` for each direction of ``w``."""
    pts = w.directions()
    if not incident:
        return pts @ -np.asarray(cfg.gravity, dtype=float)
    margins = [_margins(pts, r, component, cfg.theta_tol) for r in incident]
    return np.min(np.stack(margins), axis=0)


def best_direction(w: DisassemblySpace, incident: Sequence[SSRelation], cfg: SdaConfig, component: str):
    """Maximum-clearance removal direction, or None for an empty space.

    Ties resolve to the lowest sample index.
    """
    if w.is_empty:
        return None
    margin = clearance(w, incident, cfg, component)
    return w.directions()[int(np.argmax(margin))].copy()


def classify_sdof(
    w: DisassemblySpace, incident: Sequence[SSRelation], cfg: SdaConfig, component: str
) -> SdofLabel:
    if not incident:
        return SdofLabel.FREE if w.is_full else SdofLabel.LIN
    if w.is_empty:
        # only the threaded fastener (side a) is turned loose
        if any(r.kind == "screwed" and r.a == component for r in incident):
            return SdofLabel.ROT
        return SdofLabel.FIX
    pts = w.directions()
    cos_tol = math.cos(cfg.theta_tol)
    for r in incident:
        if r.kind != "concentric":
            continue
        kind, axes = _constraint(r, component)
        if kind != "cones":
            continue
        inside = np.zeros(len(pts), dtype=bool)
        for ax in axes:
            inside |= pts @ ax >= cos_tol
        if inside.all():
            return SdofLabel.FITS
    if all(r.kind == "congruent" and r.geometry.kind == "plane" for r in incident):
        d = best_direction(w, incident, cfg, component)
        # tolerance band keeps sampling noise around a horizontal normal out
        if float(d @ -np.asarray(cfg.gravity)) > math.sin(cfg.theta_tol):
            return SdofLabel.AGPP
    return SdofLabel.LIN


@dataclass
class RelationGraphSdof:
    labels: dict[str, SdofLabel]
    spaces: dict[str, DisassemblySpace]
    edges: dict[str, SdofLabel]
    directions: dict[str, np.ndarray | None] = field(default_factory=dict)

    def removable(self) -> list[str]:
        return sorted(c for c, lab in self.labels.items() if lab is not SdofLabel.FIX)

    def same_as(self, other: "RelationGraphSdof") -> bool:
        if self.labels != other.labels or self.edges != other.edges:
            return False
        if self.spaces.keys() != other.spaces.keys():
            return False
        return all(self.spaces[k] == other.spaces[k] for k in self.spaces)


def component_space(model: RelationalAssemblyModel, cid: str, cfg: SdaConfig):
    sphere = cfg.sphere
    incident = model.incident(cid)
    spaces = [sphere.full()] + [subspace(r, sphere, cfg, cid) for r in incident]
    return intersect_spaces(spaces), incident


def build_relation_graph(model: RelationalAssemblyModel, cfg: SdaConfig) -> RelationGraphSdof:
    labels, spaces, dirs = {}, {}, {}
    for cid in sorted(model.components):
        w, incident = component_space(model, cid, cfg)
        spaces[cid] = w
        labels[cid] = classify_sdof(w, incident, cfg, cid)
        dirs[cid] = removal_direction(w, incident, cfg, cid)
    edges = {}
    sphere = cfg.sphere
    for rid, rel in sorted(model.relations.items()):
        w = intersect_spaces([sphere.full(), subspace(rel, sphere, cfg, rel.a)])
        edges[rid] = classify_sdof(w, [rel], cfg, rel.a)
    return RelationGraphSdof(labels, spaces, edges, dirs)


def removal_direction(w, incident, cfg, cid):
    """Best direction of ``w``; for a screwed-in fastener, its screw axis."""
    d = best_direction(w, incident, cfg, cid)
    if d is None:
        for r in incident:
            if r.kind == "screwed" and r.a == cid:
                return effective_direction(r, cid)
    return d


def dump_spaces_csv(graph: RelationGraphSdof, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        out = csv.writer(fh, lineterminator="\n")
        out.writerow(["component", "index", "x", "y", "z"])
        for cid in sorted(graph.spaces):
            w = graph.spaces[cid]
            for idx, p in zip(w.indices, w.directions()):
                out.writerow([cid, int(idx), repr(float(p[0])), repr(float(p[1])), repr(float(p[2]))])
