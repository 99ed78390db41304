import pytest
from hypothesis import given, settings, strategies as st

from maintplan.errors import ValidationFailed
from maintplan.hmp import ManipulationPrimitive, Verb, default_rulebase, load_tool_catalog, plan_disassembly
from maintplan.cli import data_file
from maintplan.mpdsl import (
    Ast,
    ParseError,
    SemanticError,
    State,
    Statement,
    WithClause,
    format_ast,
    grammar_text,
    interpret,
    parse,
    serialize,
    tokenize,
    validate,
)
from maintplan.mpdsl.parser import RESERVED
from maintplan.sda import SdaConfig, SdofLabel as L

TOOLS = load_tool_catalog(data_file("tools.json"))


def test_reference_statement_ast():
    ast = parse("fits(screw_1) <= twist[sd, rot(screw_1)];")
    (s,) = ast.statements
    assert s == Statement(State(L.FITS, "screw_1"), Verb.TWIST, "sd", (), State(L.ROT, "screw_1"))
    assert s.span.line == 1 and s.span.column == 1


def test_tool_params_and_comments():
    text = "// loosen\nfits(screw_1) <= twist[sd, M4, rot(screw_1)]; // first\n"
    (s,) = parse(text).statements
    assert s.tool_params == ("M4",) and s.span.line == 2


def test_empty_program():
    assert parse("") == Ast(())
    assert serialize([]) == ""


def test_component_mismatch():
    with pytest.raises(SemanticError) as err:
        parse("free(block) <= pull[gr.2f, lin(base)];")
    assert (err.value.span.line, err.value.span.column) == (1, 1)


def test_move_carries_no_wrench():
    with pytest.raises(SemanticError):
        parse("free(a) <= move[gr.2f, free(a)] with(from=a.grasp, to=a.clear, frame=world, wrench=(0, 0, 0, 0, 0, 0));")


@pytest.mark.parametrize(
    "text, line, column",
    [
        ("fits(screw_1) <= twist[sd, rot(screw_1)]", 1, 1),
        ("fits(screw_1) <= twist[sd, rot(screw_1)];\nfree(x) <= pull[gr.2f lin(x)];", 2, 1),
        ("fits(screw_1) <= twist[sd, rot(screw_1)];\n;", 1, 41),
        ("bogus(x) <= pull[gr.2f, lin(x)];", 1, 1),
        ("free(x) <= pull[gr.2f, lin(x)] $;", 1, 1),
    ],
)
def test_parse_error_positions(text, line, column):
    with pytest.raises(ParseError) as err:
        parse(text)
    assert (err.value.line, err.value.column) == (line, column)


def test_reserved_words_are_not_identifiers():
    for word in sorted(RESERVED):
        with pytest.raises(ParseError):
            parse(f"free({word}) <= pull[gr.2f, lin({word})];")


def test_soft_keywords_are_identifiers():
    (s,) = parse("free(frame) <= pull[with, lin(frame)];").statements
    assert s.tool == "with" and s.pre.component == "frame"


def test_screw_chain_serializes_as_rules():
    chain = [
        ManipulationPrimitive(Verb.TWIST, "sd", "screw_1", L.ROT, L.FITS),
        ManipulationPrimitive(Verb.PULL, "gr.3f", "screw_1", L.FITS, L.FREE),
    ]
    assert serialize(chain) == (
        "fits(screw_1) <= twist[sd, rot(screw_1)];\n"
        "free(screw_1) <= pull[gr.3f, fits(screw_1)];\n"
    )


def test_bound_poses_round_trip():
    mp = ManipulationPrimitive(
        Verb.PULL, "gr.2f", "block", L.LIN, L.FREE,
        from_pose=(0.5, 0.0, 0.1, 0.0, 0.0, 0.0), to_pose="block.up", frame="world",
        wrench=(0.0, 0.0, 5.0, 0.0, 0.0, 0.0),
    )
    text = serialize([mp])
    assert "with(from=pose(0.5, 0.0, 0.1, 0.0, 0.0, 0.0), to=block.up, frame=world" in text
    (back,) = interpret(parse(text))
    assert back == mp
    assert back.wrench == (0.0, 0.0, 5.0, 0.0, 0.0, 0.0)


def test_non_finite_numbers_rejected():
    mp = ManipulationPrimitive(Verb.PULL, "gr.2f", "b", L.LIN, L.FREE, from_pose=(float("nan"),) * 6)
    with pytest.raises(ValueError):
        serialize([mp])


def test_program_validates_against_assembly(block4):
    plan = plan_disassembly(block4, SdaConfig(), default_rulebase(), "block")
    ast = parse(serialize(plan.primitives))
    assert validate(ast, block4, TOOLS) == []
    calls = []
    out = interpret(ast, lambda i, mp: calls.append(i), model=block4, tools=TOOLS)
    assert out == plan.primitives and calls == list(range(5))


def test_unknown_tool_diagnostic(block4):
    ast = parse("fits(screw_1) <= twist[gr.9z, rot(screw_1)];")
    (d,) = validate(ast, block4, TOOLS)
    assert d.code == "unknown-tool"


def test_pull_before_twist_is_a_chain_error(block4):
    ast = parse("free(screw_1) <= pull[gr.3f, fits(screw_1)];\nfits(screw_1) <= twist[sd, rot(screw_1)];")
    report = validate(ast, block4, TOOLS)
    assert report and report[0].code == "chain" and report[0].span.line == 1
    with pytest.raises(ValidationFailed):
        interpret(ast, model=block4)


def test_removed_and_unknown_component(block2):
    ast = parse("free(block) <= pull[gr.2f, lin(block)];\nfree(block) <= pull[gr.2f, lin(block)];\nfree(zz) <= pull[gr.2f, lin(zz)];")
    assert [d.code for d in validate(ast, block2)] == ["removed", "unknown-component"]


def test_single_statement_single_callback():
    seen = []
    interpret(parse("free(a) <= move[gr.2f, free(a)];"), lambda i, mp: seen.append(mp.component))
    assert seen == ["a"]


def test_grammar_is_shipped():
    assert "statement" in grammar_text()


def test_tokenizer_rejects_glued_numbers():
    kinds = [t.kind for t in tokenize("pose(1x, 2)")]
    assert "error" in kinds or kinds.count("number") < 2


# primitives as any planner could produce them
idents = st.from_regex(r"[a-z][a-z0-9_.]{0,6}", fullmatch=True).filter(lambda s: s not in RESERVED)
numbers = st.floats(allow_nan=False, allow_infinity=False, width=64)
tuple6 = st.tuples(*[numbers] * 6)
labels = st.sampled_from(list(L))


@st.composite
def primitives(draw):
    verb = draw(st.sampled_from(list(Verb)))
    comp = draw(idents)
    kw = {}
    if draw(st.booleans()):
        kw["from_pose"] = draw(st.one_of(idents, tuple6))
        kw["to_pose"] = draw(st.one_of(idents, tuple6))
        kw["frame"] = draw(idents)
        if verb is not Verb.MOVE and draw(st.booleans()):
            kw["wrench"] = draw(tuple6)
    return ManipulationPrimitive(
        verb, draw(idents), comp, draw(labels), draw(labels), tuple(draw(st.lists(idents, max_size=2))), **kw
    )


@settings(max_examples=100, deadline=None)
@given(st.lists(primitives(), max_size=8))
def test_round_trip(plan):
    text = serialize(plan)
    assert interpret(parse(text)) == plan
    assert format_ast(parse(text)) == text
    assert serialize(interpret(parse(text))) == text


@settings(max_examples=150, deadline=None)
@given(st.lists(primitives(), min_size=1, max_size=4), st.data())
def test_corruption_reported_at_or_before_edit(plan, data):
    text = serialize(plan)
    i = data.draw(st.integers(0, len(text) - 1))
    ch = data.draw(st.sampled_from(list("();,[]<=x9 .-$\n")))
    mode = data.draw(st.sampled_from(["replace", "insert", "delete"]))
    if mode == "replace":
        bad = text[:i] + ch + text[i + 1:]
    elif mode == "insert":
        bad = text[:i] + ch + text[i:]
    else:
        bad = text[:i] + text[i + 1:]
    line = text.count("\n", 0, i) + 1
    column = i - (text.rfind("\n", 0, i) + 1) + 1
    try:
        parse(bad)
    except ParseError as err:
        assert (err.line, err.column) <= (line, column)
    except SemanticError as err:
        assert (err.span.line, err.span.column) <= (line, column)
