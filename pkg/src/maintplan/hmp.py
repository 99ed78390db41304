"""Symbolic disassembly logic: state transitions driven by manipulation
primitives, rule-based verb and tool inference, and monotone peeling of
blockers until the target component is free."""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Sequence, Union

from .assembly import RelationalAssemblyModel
from .errors import NoPlan, NoRule, NoTool, PreconditionMismatch, SchemaError, UnknownComponent
from .sda import SdaConfig, SdofLabel, build_relation_graph

Pose = Union[str, tuple]
ZERO_WRENCH = (0.0, 0.0, 0.0, 0.0, 0.0, 0.0)
WORLD = "world"


class Verb(str, enum.Enum):
    MOVE = "move"
    TWIST = "twist"
    PULL = "pull"
    PUT = "put"

    def __str__(self):
        return self.value

    @property
    def has_wrench(self) -> bool:
        return self is not Verb.MOVE


def default_poses(component: str) -> tuple[str, str]:
    return f"{component}.grasp", f"{component}.clear"


@dataclass(frozen=True)
class ManipulationPrimitive:
    verb: Verb
    tool: str
    component: str
    pre: SdofLabel
    post: SdofLabel
    tool_params: tuple[str, ...] = ()
    from_pose: Pose | None = None
    to_pose: Pose | None = None
    frame: str = WORLD
    wrench: tuple[float, ...] | None = None

    def __post_init__(self):
        start, end = default_poses(self.component)
        if self.from_pose is None:
            object.__setattr__(self, "from_pose", start)
        if self.to_pose is None:
            object.__setattr__(self, "to_pose", end)
        if self.verb.has_wrench and self.wrench is None:
            object.__setattr__(self, "wrench", ZERO_WRENCH)
        if not self.verb.has_wrench and self.wrench is not None:
            raise ValueError("move primitives carry no wrench")
        if self.wrench is not None:
            if len(self.wrench) != 6:
                raise ValueError("wrench must have 6 entries")
            object.__setattr__(self, "wrench", tuple(float(v) for v in self.wrench))
        object.__setattr__(self, "tool_params", tuple(self.tool_params))

    def rule(self) -> str:
        params = "".join(f", {p}" for p in self.tool_params)
        return f"{self.post}({self.component}) <= {self.verb}[{self.tool}{params}, {self.pre}({self.component})]"


@dataclass
class RuleBase:
    verb_rules: dict[SdofLabel, Verb]
    tool_rules: dict[tuple[str, Verb], tuple[str, tuple[str, ...]]]
    post_rules: dict[tuple[SdofLabel, Verb], SdofLabel]


DEFAULT_RULES_DOC = {
    "verb_rules": {"rot": "twist", "fits": "pull", "lin": "pull", "agpp": "pull", "free": "move"},
    "tool_rules": [
        {"class": "screw", "verb": "twist", "tool": "sd", "params": ["M4"]},
        {"class": "screw", "verb": "pull", "tool": "gr.3f", "params": []},
        {"class": "cap_screw", "verb": "twist", "tool": "sd", "params": []},
        {"class": "cap_screw", "verb": "pull", "tool": "gr.3f", "params": []},
        {"class": "airhose", "verb": "pull", "tool": "gr.ah", "params": []},
        {"class": "*", "verb": "pull", "tool": "gr.2f", "params": []},
        {"class": "*", "verb": "move", "tool": "gr.2f", "params": []},
    ],
    "post_rules": [
        {"pre": "rot", "verb": "twist", "post": "fits"},
        {"pre": "fits", "verb": "pull", "post": "free"},
        {"pre": "lin", "verb": "pull", "post": "free"},
        {"pre": "agpp", "verb": "pull", "post": "free"},
        {"pre": "free", "verb": "move", "post": "free"},
    ],
}


def parse_rulebase(doc) -> RuleBase:
    try:
        verb_rules = {SdofLabel.parse(k): Verb(v) for k, v in doc["verb_rules"].items()}
        tool_rules = {}
        for i, r in enumerate(doc["tool_rules"]):
            tool_rules[(r["class"], Verb(r["verb"]))] = (r["tool"], tuple(r.get("params", [])))
        post_rules = {
            (SdofLabel.parse(r["pre"]), Verb(r["verb"])): SdofLabel.parse(r["post"])
            for r in doc["post_rules"]
        }
    except (KeyError, TypeError, ValueError, AttributeError) as exc:
        raise SchemaError(f"invalid rule base: {exc}") from None
    for label, verb in verb_rules.items():
        if (label, verb) not in post_rules:
            raise SchemaError(f"rule base has no post rule for {verb}({label})")
    return RuleBase(verb_rules, tool_rules, post_rules)


def default_rulebase() -> RuleBase:
    return parse_rulebase(DEFAULT_RULES_DOC)


def load_rulebase(path) -> RuleBase:
    return parse_rulebase(json.loads(Path(path).read_text(encoding="utf-8")))


def load_tool_catalog(path) -> dict[str, float]:
    """Tool id -> change time in seconds."""
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    try:
        return {t["id"]: float(t.get("change_time_s", 0.0)) for t in doc["tools"]}
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaError(f"invalid tool catalog: {exc}") from None


def infer_primitive(label: SdofLabel, rules: RuleBase) -> Verb:
    try:
        return rules.verb_rules[label]
    except KeyError:
        raise NoRule(f"no manipulation primitive applies to state {label}") from None


def infer_tool(component_class: str, verb: Verb, rules: RuleBase) -> tuple[str, tuple[str, ...]]:
    for key in ((component_class, verb), ("*", verb)):
        if key in rules.tool_rules:
            return rules.tool_rules[key]
    raise NoTool(f"no tool for {verb} on class {component_class!r}")


@dataclass(frozen=True)
class DisassemblyState:
    labels: dict
    removed: frozenset = frozenset()


def apply_primitive(state: DisassemblyState, mp: ManipulationPrimitive) -> DisassemblyState:
    if mp.component in state.removed or mp.component not in state.labels:
        raise UnknownComponent(mp.component)
    current = state.labels[mp.component]
    if current is SdofLabel.FIX:
        raise PreconditionMismatch(f"{mp.component} is fixed; no primitive applies to it")
    if current != mp.pre:
        raise PreconditionMismatch(
            f"{mp.verb} expects {mp.pre}({mp.component}) but the state is {current}({mp.component})"
        )
    labels = dict(state.labels)
    labels[mp.component] = mp.post
    removed = state.removed
    if mp.post is SdofLabel.FREE and mp.verb in (Verb.PULL, Verb.MOVE):
        removed = removed | {mp.component}
    return DisassemblyState(labels, frozenset(removed))


def removal_chain(component: str, cls: str, label: SdofLabel, rules: RuleBase) -> list[ManipulationPrimitive]:
    """Primitives that drive ``label`` to free for one component."""
    chain = []
    seen = set()
    while True:
        verb = infer_primitive(label, rules)
        if (label, verb) in seen:
            raise NoRule(f"rule base loops on {verb}({label}) without freeing {component}")
        seen.add((label, verb))
        try:
            post = rules.post_rules[(label, verb)]
        except KeyError:
            raise NoRule(f"no post rule for {verb}({label})") from None
        tool, params = infer_tool(cls, verb, rules)
        chain.append(ManipulationPrimitive(verb, tool, component, label, post, params))
        if post is SdofLabel.FREE:
            return chain
        label = post


@dataclass
class Plan:
    primitives: list[ManipulationPrimitive]
    target: str
    # max-clearance removal direction at the time each component is freed
    directions: dict = field(default_factory=dict)

    def components(self) -> list[str]:
        seen = []
        for mp in self.primitives:
            if mp.component not in seen:
                seen.append(mp.component)
        return seen

    def chains(self) -> dict[str, list[ManipulationPrimitive]]:
        out: dict[str, list[ManipulationPrimitive]] = {}
        for mp in self.primitives:
            out.setdefault(mp.component, []).append(mp)
        return out


def _pick_blocker(model: RelationalAssemblyModel, labels: dict, target: str):
    """Nearest removable component breadth-first from the target.

    The search only passes through non-removable components; within the
    nearest level the lexicographically smallest id wins.
    """
    seen = {target}
    frontier = [target]
    while frontier:
        level = set()
        for c in frontier:
            for rel in model.incident(c):
                other = rel.other(c)
                if other not in seen:
                    level.add(other)
        seen |= level
        removable = sorted(c for c in level if labels[c] is not SdofLabel.FIX)
        if removable:
            return removable[0]
        frontier = sorted(level)
    return None


def plan_disassembly(
    model: RelationalAssemblyModel, cfg: SdaConfig, rules: RuleBase, target: str
) -> Plan:
    model.component(target)
    residual = model
    primitives: list[ManipulationPrimitive] = []
    directions = {}
    while True:
        graph = build_relation_graph(residual, cfg)
        label = graph.labels[target]
        if label is not SdofLabel.FIX:
            # a screwed-in target is loosened by its own twist-then-pull chain
            chosen = target
        else:
            chosen = _pick_blocker(residual, graph.labels, target)
            if chosen is None:
                raise NoPlan(
                    f"{target!r} stays {label} and nothing removable blocks it; freeing it "
                    "would need a subassembly, which monotone planning cannot form"
                )
        chain = removal_chain(chosen, residual.components[chosen].cls, graph.labels[chosen], rules)
        primitives.extend(chain)
        directions[chosen] = graph.directions[chosen]
        if chosen == target:
            return Plan(primitives, target, directions)
        residual = residual.without([chosen])


def residual_label(model: RelationalAssemblyModel, removed, component, cfg: SdaConfig) -> SdofLabel:
    graph = build_relation_graph(model.without(removed), cfg)
    return graph.labels[component]


def replay(
    model: RelationalAssemblyModel,
    primitives: Sequence[ManipulationPrimitive],
    cfg: SdaConfig,
    on_step=None,
) -> DisassemblyState:
    """Execute ``primitives`` symbolically against the assembly.

    A component's starting label is derived from the residual assembly when
    it is first touched, so removals earlier in the program are respected.
    """
    state = DisassemblyState({}, frozenset())
    touched = set()
    for i, mp in enumerate(primitives):
        c = mp.component
        if c not in model.components:
            raise UnknownComponent(c)
        if c not in touched and c not in state.removed:
            labels = dict(state.labels)
            labels[c] = residual_label(model, state.removed, c, cfg)
            state = DisassemblyState(labels, state.removed)
            touched.add(c)
        state = apply_primitive(state, mp)
        if on_step is not None:
            on_step(i, state)
    return state


def with_bindings(mp: ManipulationPrimitive, **changes) -> ManipulationPrimitive:
    return replace(mp, **changes)
