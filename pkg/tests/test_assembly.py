import json

import pytest
from hypothesis import given, strategies as st

from maintplan.assembly import (
    Component,
    FeatureGeometry,
    RelationalAssemblyModel,
    SSRelation,
    assembly_to_dict,
    load_assembly,
    neighbors,
    parse_assembly,
    save_assembly,
)
from maintplan.cli import data_file
from maintplan.errors import SchemaError, UnknownComponent, ValidationError


def test_two_component_file(block2):
    assert len(block2.components) == 2
    assert len(block2.relations) == 1
    assert block2.relations["r1"].kind == "congruent"


def test_empty_file_is_valid():
    model = load_assembly(data_file("empty_assembly.json"))
    assert model.components == {} and model.relations == {}


def test_missing_component_is_named():
    doc = json.loads(data_file("block2.json").read_text())
    doc["relations"][0]["b"] = "ghost"
    with pytest.raises(ValidationError, match="ghost"):
        parse_assembly(doc)


def test_isolated_component_has_no_neighbors():
    model = RelationalAssemblyModel.build([Component("lone", "block")])
    assert neighbors(model, "lone") == []


def test_base_has_one_neighbor(block2):
    (rel, other), = neighbors(block2, "base")
    assert other == "block" and rel.id == "r1"


def test_valve_neighbors_are_incident_only(valve9):
    entries = neighbors(valve9, "valve")
    assert 0 < len(entries) <= 11
    for rel, other in entries:
        assert "valve" in (rel.a, rel.b) and other != "valve"


def test_unknown_component_lookup(block2):
    with pytest.raises(UnknownComponent):
        neighbors(block2, "nope")


@pytest.mark.parametrize(
    "mutate",
    [
        lambda d: d.pop("version"),
        lambda d: d.update(components="x"),
        lambda d: d["relations"][0]["geometry"].update(direction=[0, 0]),
        lambda d: d["relations"][0].update(through="yes"),
    ],
)
def test_schema_errors(mutate):
    doc = json.loads(data_file("block2.json").read_text())
    mutate(doc)
    with pytest.raises((SchemaError, ValidationError)):
        parse_assembly(doc)


def test_direction_drift_is_renormalized():
    doc = json.loads(data_file("block2.json").read_text())
    doc["relations"][0]["geometry"]["direction"] = [1.0 + 1e-8, 0.0, 0.0]
    rel = parse_assembly(doc).relations["r1"]
    assert rel.geometry.direction == (1.0, 0.0, 0.0)


def test_non_unit_direction_rejected():
    doc = json.loads(data_file("block2.json").read_text())
    doc["relations"][0]["geometry"]["direction"] = [2.0, 0.0, 0.0]
    with pytest.raises(ValidationError):
        parse_assembly(doc)


def test_screwed_needs_line():
    geo = FeatureGeometry("plane", (0, 0, 0), (0, 0, 1))
    with pytest.raises(ValidationError):
        SSRelation("r", "screwed", "a", "b", geo)


def test_duplicate_ids_rejected():
    with pytest.raises(ValidationError):
        RelationalAssemblyModel.build([Component("a", "x"), Component("a", "y")])


def test_save_round_trip(tmp_path, valve9):
    save_assembly(valve9, tmp_path / "v.json")
    assert load_assembly(tmp_path / "v.json") == valve9


AXES = [(1.0, 0.0, 0.0), (0.0, 1.0, 0.0), (0.0, 0.0, 1.0), (-1.0, 0.0, 0.0), (0.0, 0.0, -1.0)]


@st.composite
def assemblies(draw):
    n = draw(st.integers(1, 6))
    ids = [f"c{i}" for i in range(n)]
    comps = [Component(c, draw(st.sampled_from(["block", "screw", "base"]))) for c in ids]
    rels = []
    if n > 1:
        for k in range(draw(st.integers(0, 8))):
            a, b = draw(st.lists(st.sampled_from(ids), min_size=2, max_size=2, unique=True))
            kind, geo = draw(st.sampled_from([("congruent", "plane"), ("concentric", "line"), ("screwed", "line")]))
            e = draw(st.sampled_from(AXES))
            rels.append(SSRelation(f"r{k}", kind, a, b, FeatureGeometry(geo, (0.0, 0.0, 0.0), e), draw(st.booleans())))
    return RelationalAssemblyModel.build(comps, rels)


@given(assemblies())
def test_dict_round_trip(model):
    assert parse_assembly(assembly_to_dict(model)) == model


@given(assemblies())
def test_neighbors_symmetric(model):
    for a in model.components:
        for rel, b in neighbors(model, a):
            assert (rel, a) in neighbors(model, b)
