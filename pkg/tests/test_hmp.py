import time
from collections import Counter

import pytest
from hypothesis import given, settings, strategies as st

from maintplan.assembly import Component, FeatureGeometry, RelationalAssemblyModel, SSRelation
from maintplan.errors import NoPlan, NoRule, NoTool, PreconditionMismatch, SchemaError
from maintplan.hmp import (
    DEFAULT_RULES_DOC,
    DisassemblyState,
    ManipulationPrimitive,
    Verb,
    apply_primitive,
    default_rulebase,
    infer_primitive,
    infer_tool,
    parse_rulebase,
    plan_disassembly,
    replay,
)
from maintplan.sda import SdaConfig, SdofLabel as L

RULES = default_rulebase()
CFG = SdaConfig()


def mp(verb, tool, comp, pre, post, params=()):
    return ManipulationPrimitive(Verb(verb), tool, comp, L(pre), L(post), tuple(params))


def test_twist_loosens_screw():
    s = DisassemblyState({"screw_1": L.ROT})
    s = apply_primitive(s, mp("twist", "sd", "screw_1", "rot", "fits"))
    assert s.labels["screw_1"] is L.FITS and not s.removed


def test_pull_removes_screw():
    s = DisassemblyState({"screw_1": L.FITS})
    s = apply_primitive(s, mp("pull", "gr.3f", "screw_1", "fits", "free"))
    assert s.labels["screw_1"] is L.FREE and "screw_1" in s.removed


def test_fixed_component_admits_nothing():
    s = DisassemblyState({"base": L.FIX})
    with pytest.raises(PreconditionMismatch):
        apply_primitive(s, mp("pull", "gr.2f", "base", "lin", "free"))
    with pytest.raises(PreconditionMismatch):
        apply_primitive(s, mp("pull", "gr.2f", "base", "fix", "free"))


def test_verb_inference():
    assert infer_primitive(L.ROT, RULES) is Verb.TWIST
    assert infer_primitive(L.LIN, RULES) is Verb.PULL
    with pytest.raises(NoRule):
        infer_primitive(L.FIX, RULES)


def test_tool_inference():
    assert infer_tool("screw", Verb.TWIST, RULES) == ("sd", ("M4",))
    assert infer_tool("block", Verb.PULL, RULES) == ("gr.2f", ())
    with pytest.raises(NoTool):
        infer_tool("unobtainium", Verb.TWIST, RULES)


def test_unknown_class_pull_falls_back_to_gripper():
    assert infer_tool("unobtainium", Verb.PULL, RULES) == ("gr.2f", ())


def test_block4_plan(block4):
    t0 = time.perf_counter()
    plan = plan_disassembly(block4, CFG, RULES, "block")
    assert time.perf_counter() - t0 < 1.0
    assert [m.rule() for m in plan.primitives] == [
        "fits(screw_1) <= twist[sd, rot(screw_1)]",
        "free(screw_1) <= pull[gr.3f, fits(screw_1)]",
        "fits(screw_2) <= twist[sd, rot(screw_2)]",
        "free(screw_2) <= pull[gr.3f, fits(screw_2)]",
        "free(block) <= pull[gr.2f, agpp(block)]",
    ]


def test_block2_plan(block2):
    plan = plan_disassembly(block2, CFG, RULES, "block")
    assert [m.rule() for m in plan.primitives] == ["free(block) <= pull[gr.2f, lin(block)]"]


def test_valve_plan(valve9):
    plan = plan_disassembly(valve9, CFG, RULES, "valve")
    assert plan.components() == ["airhose_1", "airhose_3", "screw_1", "connector", "screw_2", "screw_3", "valve"]
    assert len(plan.primitives) <= 2 * len(valve9.components)


def test_welded_pair_has_no_plan():
    geo = FeatureGeometry("line", (0.0, 0.0, 0.0), (0.0, 0.0, 1.0))
    model = RelationalAssemblyModel.build(
        [Component("a", "plate"), Component("b", "plate")],
        [
            SSRelation("r1", "congruent", "a", "b", FeatureGeometry("plane", (0.0, 0.0, 0.0), (0.0, 0.0, 1.0))),
            SSRelation("r2", "congruent", "a", "b", FeatureGeometry("plane", (0.0, 0.0, 0.0), (0.0, 0.0, -1.0))),
            SSRelation("r3", "concentric", "a", "b", geo, through=True),
            SSRelation("r4", "congruent", "a", "b", FeatureGeometry("plane", (0.0, 0.0, 0.0), (1.0, 0.0, 0.0))),
            SSRelation("r5", "congruent", "a", "b", FeatureGeometry("plane", (0.0, 0.0, 0.0), (-1.0, 0.0, 0.0))),
        ],
    )
    for target in ("a", "b"):
        with pytest.raises(NoPlan):
            plan_disassembly(model, CFG, RULES, target)


def test_rulebase_needs_post_rules():
    doc = {**DEFAULT_RULES_DOC, "post_rules": DEFAULT_RULES_DOC["post_rules"][1:]}
    with pytest.raises(SchemaError):
        parse_rulebase(doc)


def test_looping_rules_rejected(block2):
    doc = {
        **DEFAULT_RULES_DOC,
        "verb_rules": {**DEFAULT_RULES_DOC["verb_rules"], "fits": "twist"},
        "post_rules": DEFAULT_RULES_DOC["post_rules"] + [{"pre": "fits", "verb": "twist", "post": "rot"}],
    }
    geo = FeatureGeometry("line", (0.0, 0.0, 0.0), (0.0, 0.0, 1.0))
    model = RelationalAssemblyModel.build(
        [Component("s", "screw"), Component("b", "base")], [SSRelation("r", "screwed", "s", "b", geo)]
    )
    with pytest.raises(NoRule):
        plan_disassembly(model, CFG, parse_rulebase(doc), "s")


AXES = [(1.0, 0.0, 0.0), (0.0, 1.0, 0.0), (0.0, 0.0, 1.0), (-1.0, 0.0, 0.0), (0.0, -1.0, 0.0), (0.0, 0.0, -1.0)]
KINDS = [("congruent", "plane"), ("concentric", "line"), ("screwed", "line")]


@st.composite
def assemblies(draw):
    n = draw(st.integers(2, 7))
    ids = [f"c{i}" for i in range(n)]
    classes = ["block", "screw", "airhose", "cap_screw"]
    comps = [Component(c, draw(st.sampled_from(classes))) for c in ids]
    rels = []
    for k in range(draw(st.integers(0, 9))):
        a, b = draw(st.lists(st.sampled_from(ids), min_size=2, max_size=2, unique=True))
        kind, geo = draw(st.sampled_from(KINDS))
        e = draw(st.sampled_from(AXES))
        rels.append(SSRelation(f"r{k}", kind, a, b, FeatureGeometry(geo, (0.0, 0.0, 0.0), e), draw(st.booleans())))
    return RelationalAssemblyModel.build(comps, rels), draw(st.sampled_from(ids))


SMALL = SdaConfig(n=1500, seed=1)


@settings(max_examples=60, deadline=None)
@given(assemblies())
def test_plans_replay_soundly(case):
    model, target = case
    try:
        plan = plan_disassembly(model, SMALL, RULES, target)
    except (NoPlan, NoTool):
        # NoTool: a non-fastener class ended up screwed in
        return
    state = replay(model, plan.primitives, SMALL)
    assert target in state.removed
    assert len(plan.primitives) <= 2 * len(model.components)
    # monotone: every component is freed once and never touched again
    freed = [m.component for m in plan.primitives if m.post is L.FREE]
    assert Counter(freed) == Counter(set(freed))
    for i, m in enumerate(plan.primitives):
        assert m.component not in freed[: sum(1 for p in plan.primitives[:i] if p.post is L.FREE)]
    assert plan_disassembly(model, SMALL, RULES, target).primitives == plan.primitives
