"""Ternary voxel map and adaptive space division.

The map is recursively split into octants while a region's share of
occupied voxels exceeds ``rho_limit``; each leaf carries an exploration
stepsize that shrinks with depth, so planners take long strides through
empty space and short ones near clutter.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterator

import numpy as np

from .errors import EmptyRegion, OutOfBounds, SchemaError

FREE, OCCUPIED, UNKNOWN = 0, 1, 2
_CHARS = {FREE: "F", OCCUPIED: "O", UNKNOWN: "U"}
_CODES = {v: k for k, v in _CHARS.items()}


@dataclass(eq=False)
class ProbabilisticVoxelMap:
    """Dense voxel grid; ``states`` is indexed ``[ix, iy, iz]``."""

    origin: np.ndarray
    resolution: float
    states: np.ndarray
    unknown_as_occupied: bool = True
    _blocked: np.ndarray | None = field(default=None, init=False, repr=False)

    def __post_init__(self):
        self.origin = np.asarray(self.origin, dtype=float)
        self.states = np.asarray(self.states, dtype=np.uint8)
        if self.states.ndim != 3 or min(self.states.shape) < 1:
            raise ValueError("states must be a non-empty 3-D array")
        if not self.resolution > 0:
            raise ValueError("resolution must be positive")
        if not np.isin(self.states, (FREE, OCCUPIED, UNKNOWN)).all():
            raise ValueError("voxel states must be free, occupied or unknown")

    @classmethod
    def empty(cls, dims, resolution, origin=(0.0, 0.0, 0.0), **kw):
        return cls(np.asarray(origin, float), float(resolution), np.zeros(dims, np.uint8), **kw)

    @property
    def dims(self) -> tuple[int, int, int]:
        return tuple(int(d) for d in self.states.shape)

    @property
    def upper(self) -> np.ndarray:
        return self.origin + np.asarray(self.dims) * self.resolution

    @property
    def blocked(self) -> np.ndarray:
        """Boolean grid of voxels that count as obstacles under the unknown policy."""
        if self._blocked is None:
            b = self.states == OCCUPIED
            if self.unknown_as_occupied:
                b |= self.states == UNKNOWN
            b.setflags(write=False)
            self._blocked = b
        return self._blocked

    def invalidate(self):
        self._blocked = None

    def fill_box(self, lo, hi, state=OCCUPIED):
        """Set every voxel whose center lies in [lo, hi) to ``state``."""
        sl = self.center_slices(np.asarray(lo, float), np.asarray(hi, float))
        self.states[sl] = state
        self.invalidate()

    def center_slices(self, lo, hi) -> tuple[slice, slice, slice]:
        # voxel i has center origin + (i + 0.5) res; select lo <= center < hi
        first = np.ceil((lo - self.origin) / self.resolution - 0.5).astype(int)
        stop = np.ceil((hi - self.origin) / self.resolution - 0.5).astype(int)
        dims = np.asarray(self.dims)
        first = np.clip(first, 0, dims)
        stop = np.clip(stop, 0, dims)
        return tuple(slice(int(a), int(b)) for a, b in zip(first, stop))

    def voxel_centers(self, idx: np.ndarray) -> np.ndarray:
        return self.origin + (np.asarray(idx) + 0.5) * self.resolution

    def occupied_indices(self) -> np.ndarray:
        return np.argwhere(self.blocked)


@dataclass(frozen=True)
class Region:
    lo: tuple[float, float, float]
    hi: tuple[float, float, float]
    depth: int = 0

    def __post_init__(self):
        if any(not h > l for l, h in zip(self.lo, self.hi)):
            raise ValueError(f"empty region {self.lo} .. {self.hi}")

    def contains(self, p) -> bool:
        return all(l <= c < h for l, c, h in zip(self.lo, p, self.hi))

    @property
    def volume(self) -> float:
        return math.prod(h - l for l, h in zip(self.lo, self.hi))


def occupancy(vmap: ProbabilisticVoxelMap, region: Region | None = None) -> float:
    """Share of obstacle voxels among the voxels whose centers lie in ``region``."""
    if region is None:
        cells = vmap.blocked
    else:
        cells = vmap.blocked[vmap.center_slices(np.asarray(region.lo), np.asarray(region.hi))]
    if cells.size == 0:
        raise EmptyRegion(f"no voxel centers inside {region}")
    return float(np.count_nonzero(cells)) / cells.size


def divide_space(region: Region) -> list[Region]:
    """Eight half-open octants split at the midpoints."""
    mid = tuple(0.5 * (l + h) for l, h in zip(region.lo, region.hi))
    out = []
    for k in range(8):
        bits = ((k >> 0) & 1, (k >> 1) & 1, (k >> 2) & 1)
        lo = tuple(m if b else l for l, m, b in zip(region.lo, mid, bits))
        hi = tuple(h if b else m for h, m, b in zip(region.hi, mid, bits))
        out.append(Region(lo, hi, region.depth + 1))
    return out


def halving(s_max: float) -> Callable[[int], float]:
    return lambda depth: s_max * 0.5 ** depth


@dataclass(frozen=True)
class ASDConfig:
    rho_limit: float = 0.05
    d_max: int = 3
    s_max: float = 0.2
    schedule: Callable[[int], float] | None = None
    unknown_policy: str = "as_occupied"

    def __post_init__(self):
        if not 0.0 <= self.rho_limit <= 1.0:
            raise ValueError("rho_limit must lie in [0, 1]")
        if self.d_max < 0:
            raise ValueError("d_max must be >= 0")
        if not self.s_max > 0:
            raise ValueError("s_max must be positive")
        if self.unknown_policy not in ("as_occupied", "as_free"):
            raise ValueError("unknown_policy must be as_occupied or as_free")

    def stepsize(self, depth: int) -> float:
        return (self.schedule or halving(self.s_max))(depth)

    @property
    def s_min(self) -> float:
        return self.stepsize(self.d_max)


@dataclass
class ASDNode:
    region: Region
    rho: float
    stepsize: float | None = None
    children: list["ASDNode"] | None = None

    @property
    def is_leaf(self) -> bool:
        return self.children is None

    def walk(self) -> Iterator["ASDNode"]:
        yield self
        for c in self.children or ():
            yield from c.walk()

    def to_dict(self) -> dict:
        out = {
            "lo": list(self.region.lo),
            "hi": list(self.region.hi),
            "depth": self.region.depth,
            "rho": self.rho,
        }
        if self.is_leaf:
            out["s"] = self.stepsize
        else:
            out["children"] = [c.to_dict() for c in self.children]
        return out


@dataclass
class ASDTree:
    root: ASDNode
    config: ASDConfig

    def leaves(self) -> list[ASDNode]:
        return [n for n in self.root.walk() if n.is_leaf]

    def internal(self) -> list[ASDNode]:
        return [n for n in self.root.walk() if not n.is_leaf]

    @property
    def s_min(self) -> float:
        return self.config.s_min

    @property
    def s_max(self) -> float:
        return self.config.stepsize(0)

    def to_dict(self) -> dict:
        c = self.config
        return {
            "rho_limit": c.rho_limit,
            "d_max": c.d_max,
            "s_max": c.s_max,
            "unknown_policy": c.unknown_policy,
            "root": self.root.to_dict(),
        }


def _policy_view(vmap: ProbabilisticVoxelMap, cfg: ASDConfig) -> ProbabilisticVoxelMap:
    want = cfg.unknown_policy == "as_occupied"
    if vmap.unknown_as_occupied == want:
        return vmap
    return ProbabilisticVoxelMap(vmap.origin, vmap.resolution, vmap.states, unknown_as_occupied=want)


def build_asd(vmap: ProbabilisticVoxelMap, cfg: ASDConfig) -> ASDTree:
    """Depth-first adaptive space division of the whole map."""
    view = _policy_view(vmap, cfg)
    root_region = Region(tuple(view.origin), tuple(view.upper), 0)

    def grow(region: Region) -> ASDNode:
        try:
            rho = occupancy(view, region)
        except EmptyRegion:
            # finer than the voxel grid: nothing to measure, nothing to refine
            rho = 0.0
        node = ASDNode(region, rho)
        if rho > cfg.rho_limit and region.depth < cfg.d_max:
            node.children = [grow(child) for child in divide_space(region)]
        else:
            node.stepsize = cfg.stepsize(region.depth)
        return node

    return ASDTree(grow(root_region), cfg)


def stepsize_at(tree: ASDTree, point) -> float:
    """Stepsize of the unique leaf containing ``point``."""
    return leaf_at(tree, point).stepsize


def leaf_at(tree: ASDTree, point) -> ASDNode:
    p = tuple(float(v) for v in point)
    node = tree.root
    if not node.region.contains(p):
        raise OutOfBounds(f"point {p} outside {node.region.lo} .. {node.region.hi}")
    while not node.is_leaf:
        mid = tuple(0.5 * (l + h) for l, h in zip(node.region.lo, node.region.hi))
        node = node.children[sum(1 << i for i in range(3) if p[i] >= mid[i])]
    return node


# -- voxel map file ------------------------------------------------------------


def format_pvm(vmap: ProbabilisticVoxelMap) -> str:
    nx, ny, nz = vmap.dims
    lines = [
        "PVM 1",
        f"dims {nx} {ny} {nz}",
        f"res {vmap.resolution!r}",
        "origin " + " ".join(repr(float(c)) for c in vmap.origin),
    ]
    blocks = []
    for z in range(nz):
        rows = []
        for y in range(ny):
            rows.append("".join(_CHARS[int(v)] for v in vmap.states[:, y, z]))
        blocks.append("\n".join(rows))
    return "\n".join(lines) + "\n" + "\n\n".join(blocks) + "\n"


def parse_pvm(text: str, unknown_as_occupied: bool = True) -> ProbabilisticVoxelMap:
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()

    def header(i, key, count):
        if i >= len(lines):
            raise SchemaError(f"missing '{key}' line", f"line {i + 1}")
        parts = lines[i].split()
        if not parts or parts[0] != key or len(parts) != count + 1:
            raise SchemaError(f"expected '{key}' with {count} values", f"line {i + 1}")
        return parts[1:]

    if header(0, "PVM", 1) != ["1"]:
        raise SchemaError("unsupported PVM version", "line 1")
    try:
        nx, ny, nz = (int(v) for v in header(1, "dims", 3))
        res = float(header(2, "res", 1)[0])
        origin = np.array([float(v) for v in header(3, "origin", 3)])
    except ValueError as exc:
        raise SchemaError(str(exc), "header") from None
    if min(nx, ny, nz) < 1 or not res > 0:
        raise SchemaError("dims must be >= 1 and res > 0", "header")
    states = np.zeros((nx, ny, nz), dtype=np.uint8)
    i = 4
    for z in range(nz):
        if z > 0:
            if i >= len(lines) or lines[i] != "":
                raise SchemaError("expected a blank line between z blocks", f"line {i + 1}")
            i += 1
        for y in range(ny):
            if i >= len(lines):
                raise SchemaError("unexpected end of file", f"line {i + 1}")
            row = lines[i]
            if len(row) != nx:
                raise SchemaError(f"expected {nx} voxel characters, got {len(row)}", f"line {i + 1}")
            try:
                states[:, y, z] = [_CODES[ch] for ch in row]
            except KeyError as exc:
                raise SchemaError(f"invalid voxel state {exc.args[0]!r}", f"line {i + 1}") from None
            i += 1
    if i != len(lines):
        raise SchemaError("trailing content after the last z block", f"line {i + 1}")
    return ProbabilisticVoxelMap(origin, res, states, unknown_as_occupied=unknown_as_occupied)


def load_pvm(path, unknown_as_occupied: bool = True) -> ProbabilisticVoxelMap:
    return parse_pvm(Path(path).read_text(encoding="utf-8"), unknown_as_occupied)


def save_pvm(vmap: ProbabilisticVoxelMap, path) -> None:
    Path(path).write_text(format_pvm(vmap), encoding="utf-8")


def save_tree(tree: ASDTree, path) -> None:
    Path(path).write_text(json.dumps(tree.to_dict(), indent=1) + "\n", encoding="utf-8")
