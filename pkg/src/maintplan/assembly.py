"""Relational assembly model: components, symbolic spatial relations and
their feature geometries, loaded from a versioned JSON exchange file."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

from .errors import SchemaError, UnknownComponent, ValidationError

FORMAT_VERSION = 1
GEOMETRY_KINDS = ("plane", "line", "point", "circle")
RELATION_KINDS = ("concentric", "congruent", "screwed")

# unit-norm tolerances: renormalize small drift, reject modeling errors
_NORM_REPAIR_TOL = 1e-6
_NORM_TOL = 1e-9


@dataclass(frozen=True)
class FeatureGeometry:
    kind: str
    origin: tuple[float, float, float]
    direction: tuple[float, float, float]
    radius: float | None = None

    def __post_init__(self):
        if self.kind not in GEOMETRY_KINDS:
            raise ValidationError(f"unknown feature geometry kind {self.kind!r}")
        norm = math.sqrt(sum(c * c for c in self.direction))
        if abs(norm - 1.0) > _NORM_TOL:
            raise ValidationError(f"direction {self.direction} is not a unit vector")
        if self.kind == "circle":
            if self.radius is None or not self.radius > 0:
                raise ValidationError("circle geometry needs a positive radius")
        elif self.radius is not None:
            raise ValidationError(f"radius given for {self.kind} geometry")


@dataclass(frozen=True)
class SSRelation:
    """Contact between components ``a`` and ``b``.

    ``geometry.direction`` points from ``b`` into the half-space into which
    ``a`` can be removed; seen from ``b`` the direction is negated.
    """

    id: str
    kind: str
    a: str
    b: str
    geometry: FeatureGeometry
    through: bool = False

    def __post_init__(self):
        if self.kind not in RELATION_KINDS:
            raise ValidationError(f"relation {self.id!r}: unknown kind {self.kind!r}")
        if self.a == self.b:
            raise ValidationError(f"relation {self.id!r} connects {self.a!r} to itself")
        if self.kind == "screwed" and self.geometry.kind != "line":
            raise ValidationError(f"screwed relation {self.id!r} must lie on a line")

    def other(self, component: str) -> str:
        if component == self.a:
            return self.b
        if component == self.b:
            return self.a
        raise UnknownComponent(component)


@dataclass(frozen=True)
class Component:
    id: str
    cls: str
    pose: tuple[float, ...] | None = None
    aabb: tuple[float, float, float] | None = None

    @property
    def position(self):
        return None if self.pose is None else tuple(self.pose[:3])


@dataclass(frozen=True)
class RelationalAssemblyModel:
    components: dict[str, Component] = field(default_factory=dict)
    relations: dict[str, SSRelation] = field(default_factory=dict)

    def __post_init__(self):
        for rel in self.relations.values():
            for end in (rel.a, rel.b):
                if end not in self.components:
                    raise ValidationError(
                        f"relation {rel.id!r} references missing component {end!r}"
                    )

    @classmethod
    def build(cls, components: Iterable[Component], relations: Iterable[SSRelation] = ()):
        comps: dict[str, Component] = {}
        for c in components:
            if c.id in comps:
                raise ValidationError(f"duplicate component id {c.id!r}")
            comps[c.id] = c
        rels: dict[str, SSRelation] = {}
        for r in relations:
            if r.id in rels:
                raise ValidationError(f"duplicate relation id {r.id!r}")
            rels[r.id] = r
        return cls(comps, rels)

    def component(self, cid: str) -> Component:
        try:
            return self.components[cid]
        except KeyError:
            raise UnknownComponent(cid) from None

    def incident(self, cid: str) -> list[SSRelation]:
        self.component(cid)
        return [r for _, r in sorted(self.relations.items()) if cid in (r.a, r.b)]

    def without(self, removed: Iterable[str]) -> "RelationalAssemblyModel":
        """Residual assembly with ``removed`` components and their relations dropped."""
        gone = set(removed)
        comps = {k: v for k, v in self.components.items() if k not in gone}
        rels = {
            k: r for k, r in self.relations.items() if r.a not in gone and r.b not in gone
        }
        return RelationalAssemblyModel(comps, rels)

    def with_relation(self, rel: SSRelation) -> "RelationalAssemblyModel":
        if rel.id in self.relations:
            raise ValidationError(f"duplicate relation id {rel.id!r}")
        rels = dict(self.relations)
        rels[rel.id] = rel
        return RelationalAssemblyModel(dict(self.components), rels)


def neighbors(model: RelationalAssemblyModel, c: str) -> list[tuple[SSRelation, str]]:
    """Relations incident to ``c`` paired with the opposite endpoint, by relation id."""
    return [(r, r.other(c)) for r in model.incident(c)]


# -- exchange file -----------------------------------------------------------


def _vec(value, length, where):
    if not isinstance(value, list) or len(value) != length:
        raise SchemaError(f"expected a list of {length} numbers", where)
    out = []
    for i, v in enumerate(value):
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise SchemaError("expected a number", f"{where}[{i}]")
        out.append(float(v))
    return tuple(out)


def _unit(vec, where):
    norm = math.sqrt(sum(c * c for c in vec))
    if abs(norm - 1.0) > _NORM_REPAIR_TOL:
        raise ValidationError(f"{where}: direction {list(vec)} has norm {norm:.9g}, not 1")
    return tuple(c / norm for c in vec)


def _require(obj, key, kind, where):
    if key not in obj:
        raise SchemaError(f"missing field {key!r}", where)
    value = obj[key]
    if not isinstance(value, kind) or (kind is not bool and isinstance(value, bool)):
        raise SchemaError(f"field {key!r} has the wrong type", where)
    return value


def parse_assembly(doc) -> RelationalAssemblyModel:
    if not isinstance(doc, dict):
        raise SchemaError("top level must be an object", "$")
    if doc.get("version") != FORMAT_VERSION:
        raise SchemaError(f"unsupported version {doc.get('version')!r}", "$.version")
    comps = []
    for i, raw in enumerate(_require(doc, "components", list, "$")):
        where = f"$.components[{i}]"
        if not isinstance(raw, dict):
            raise SchemaError("component must be an object", where)
        pose = aabb = None
        if raw.get("pose") is not None:
            pose = _vec(raw["pose"], 6, where + ".pose")
        if raw.get("aabb") is not None:
            aabb = _vec(raw["aabb"], 3, where + ".aabb")
            if min(aabb) < 0:
                raise ValidationError(f"{where}: negative aabb extent")
        comps.append(
            Component(
                id=_require(raw, "id", str, where),
                cls=_require(raw, "class", str, where),
                pose=pose,
                aabb=aabb,
            )
        )
    rels = []
    for i, raw in enumerate(_require(doc, "relations", list, "$")):
        where = f"$.relations[{i}]"
        if not isinstance(raw, dict):
            raise SchemaError("relation must be an object", where)
        g = _require(raw, "geometry", dict, where)
        gw = where + ".geometry"
        radius = g.get("radius")
        if radius is not None and (isinstance(radius, bool) or not isinstance(radius, (int, float))):
            raise SchemaError("radius must be a number", gw + ".radius")
        geometry = FeatureGeometry(
            kind=_require(g, "kind", str, gw),
            origin=_vec(_require(g, "origin", list, gw), 3, gw + ".origin"),
            direction=_unit(_vec(_require(g, "direction", list, gw), 3, gw + ".direction"), gw),
            radius=None if radius is None else float(radius),
        )
        through = raw.get("through", False)
        if not isinstance(through, bool):
            raise SchemaError("field 'through' must be a boolean", where)
        rels.append(
            SSRelation(
                id=_require(raw, "id", str, where),
                kind=_require(raw, "kind", str, where),
                a=_require(raw, "a", str, where),
                b=_require(raw, "b", str, where),
                geometry=geometry,
                through=through,
            )
        )
    return RelationalAssemblyModel.build(comps, rels)


def load_assembly(path) -> RelationalAssemblyModel:
    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise SchemaError(exc.msg, f"{path}:{exc.lineno}:{exc.colno}") from None
    return parse_assembly(doc)


def assembly_to_dict(model: RelationalAssemblyModel) -> dict:
    comps = []
    for c in model.components.values():
        item = {"id": c.id, "class": c.cls}
        if c.pose is not None:
            item["pose"] = list(c.pose)
        if c.aabb is not None:
            item["aabb"] = list(c.aabb)
        comps.append(item)
    rels = []
    for r in model.relations.values():
        g = {
            "kind": r.geometry.kind,
            "origin": list(r.geometry.origin),
            "direction": list(r.geometry.direction),
        }
        if r.geometry.radius is not None:
            g["radius"] = r.geometry.radius
        rels.append(
            {"id": r.id, "kind": r.kind, "a": r.a, "b": r.b, "geometry": g, "through": r.through}
        )
    return {"version": FORMAT_VERSION, "components": comps, "relations": rels}


def save_assembly(model: RelationalAssemblyModel, path) -> None:
    Path(path).write_text(json.dumps(assembly_to_dict(model), indent=2) + "\n", encoding="utf-8")
