"""Lexer and recursive-descent parser for manipulation-primitive programs.

Error positions follow one rule: a syntax error is reported at the start of
the statement being parsed if that statement has consumed any token,
otherwise at the last token consumed before it, otherwise at the offending
token. A single-character edit therefore never yields a reported position
beyond the edited character.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from importlib import resources

from ..errors import InputError
from ..hmp import Verb
from ..sda import SdofLabel

SDOF_WORDS = frozenset(label.value for label in SdofLabel)
VERB_WORDS = frozenset(v.value for v in Verb)
RESERVED = SDOF_WORDS | VERB_WORDS


def grammar_text() -> str:
    return resources.files(__package__).joinpath("grammar.ebnf").read_text(encoding="utf-8")


@dataclass(frozen=True)
class Span:
    line: int
    column: int

    def __str__(self):
        return f"{self.line}:{self.column}"


class ParseError(InputError):
    def __init__(self, line, column, expected, found, found_at: Span | None = None):
        self.line, self.column = line, column
        self.expected = frozenset(expected)
        self.found = found
        self.found_at = found_at or Span(line, column)
        want = ", ".join(sorted(self.expected)) or "nothing"
        super().__init__(f"{line}:{column}: expected {want}, found {found} at {self.found_at}")


class SemanticError(InputError):
    def __init__(self, message, span: Span):
        self.span = span
        super().__init__(f"{span}: {message}")


# -- AST ----------------------------------------------------------------------


@dataclass(frozen=True)
class State:
    sdof: SdofLabel
    component: str
    span: Span | None = field(default=None, compare=False)


@dataclass(frozen=True)
class WithClause:
    from_pose: object  # ident string or 6-tuple of floats
    to_pose: object
    frame: str
    wrench: tuple | None = None
    span: Span | None = field(default=None, compare=False)


@dataclass(frozen=True)
class Statement:
    post: State
    verb: Verb
    tool: str
    tool_params: tuple
    pre: State
    with_clause: WithClause | None = None
    span: Span | None = field(default=None, compare=False)


@dataclass(frozen=True)
class Ast:
    statements: tuple = ()

    def __len__(self):
        return len(self.statements)


# -- lexer ----------------------------------------------------------------------


@dataclass(frozen=True)
class Token:
    kind: str  # ident, number, keyword, punct, eof
    text: str
    span: Span

    def describe(self) -> str:
        return "end of input" if self.kind == "eof" else repr(self.text)


_TOKEN = re.compile(
    r"""
    (?P<ws>[ \t\r\n]+)
  | (?P<comment>//[^\n]*)
  | (?P<number>-?[0-9]+(?:\.[0-9]+)?(?:[eE][-+]?[0-9]+)?(?![A-Za-z0-9_.]))
  | (?P<ident>[A-Za-z][A-Za-z0-9._]*)
  | (?P<punct><=|[()\[\],;=])
    """,
    re.VERBOSE,
)


def tokenize(text: str) -> list[Token]:
    out = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        span = Span(line, pos - line_start + 1)
        if m is None:
            out.append(Token("error", text[pos], span))
            break
        kind, value = m.lastgroup, m.group()
        if kind == "ident" and value in RESERVED:
            kind = "keyword"
        if kind not in ("ws", "comment"):
            out.append(Token(kind, value, span))
        newlines = value.count("\n")
        if newlines:
            line += newlines
            line_start = pos + value.rindex("\n") + 1
        pos = m.end()
    out.append(Token("eof", "", Span(line, pos - line_start + 1)))
    return out


# -- parser ---------------------------------------------------------------------


class _Parser:
    def __init__(self, text: str):
        self.tokens = tokenize(text)
        self.i = 0
        self.stmt_start: Span | None = None
        self.stmt_consumed = False
        self.last: Token | None = None

    @property
    def tok(self) -> Token:
        return self.tokens[self.i]

    def fail(self, expected):
        t = self.tok
        if self.stmt_consumed:
            at = self.stmt_start
        elif self.last is not None:
            at = self.last.span
        else:
            at = t.span
        found = f"invalid character {t.text!r}" if t.kind == "error" else t.describe()
        raise ParseError(at.line, at.column, expected, found, t.span)

    def advance(self) -> Token:
        t = self.tok
        self.i += 1
        self.last = t
        self.stmt_consumed = True
        return t

    def punct(self, text: str) -> Token:
        if self.tok.kind == "punct" and self.tok.text == text:
            return self.advance()
        self.fail({repr(text)})

    def soft(self, word: str) -> Token:
        if self.tok.kind == "ident" and self.tok.text == word:
            return self.advance()
        self.fail({repr(word)})

    def ident(self) -> str:
        if self.tok.kind == "ident":
            return self.advance().text
        self.fail({"identifier"})

    def number(self) -> float:
        if self.tok.kind == "number":
            return float(self.advance().text)
        self.fail({"number"})

    def program(self) -> Ast:
        statements = []
        while self.tok.kind != "eof":
            statements.append(self.statement())
        return Ast(tuple(statements))

    def statement(self) -> Statement:
        self.stmt_start, self.stmt_consumed = self.tok.span, False
        span = self.tok.span
        post = self.state()
        self.punct("<=")
        if not (self.tok.kind == "keyword" and self.tok.text in VERB_WORDS):
            self.fail({repr(v) for v in VERB_WORDS})
        verb = Verb(self.advance().text)
        self.punct("[")
        tool = self.ident()
        params = []
        self.punct(",")
        while self.tok.kind == "ident":
            params.append(self.advance().text)
            self.punct(",")
        if not (self.tok.kind == "keyword" and self.tok.text in SDOF_WORDS):
            self.fail({"identifier"} | {repr(s) for s in SDOF_WORDS})
        pre = self.state()
        self.punct("]")
        clause = None
        if self.tok.kind == "ident" and self.tok.text == "with":
            clause = self.with_clause()
        elif not (self.tok.kind == "punct" and self.tok.text == ";"):
            self.fail({"'with'", "';'"})
        self.punct(";")
        stmt = Statement(post, verb, tool, tuple(params), pre, clause, span)
        _check_statement(stmt)
        return stmt

    def state(self) -> State:
        span = self.tok.span
        if not (self.tok.kind == "keyword" and self.tok.text in SDOF_WORDS):
            self.fail({repr(s) for s in SDOF_WORDS})
        sdof = SdofLabel(self.advance().text)
        self.punct("(")
        component = self.ident()
        self.punct(")")
        return State(sdof, component, span)

    def with_clause(self) -> WithClause:
        span = self.tok.span
        self.soft("with")
        self.punct("(")
        self.soft("from")
        self.punct("=")
        from_pose = self.pose()
        self.punct(",")
        self.soft("to")
        self.punct("=")
        to_pose = self.pose()
        self.punct(",")
        self.soft("frame")
        self.punct("=")
        frame = self.ident()
        wrench = None
        if self.tok.kind == "punct" and self.tok.text == ",":
            self.advance()
            self.soft("wrench")
            self.punct("=")
            wrench = self.tuple6()
        self.punct(")")
        return WithClause(from_pose, to_pose, frame, wrench, span)

    def pose(self):
        name = self.ident()
        if name == "pose" and self.tok.kind == "punct" and self.tok.text == "(":
            return self.tuple6()
        return name

    def tuple6(self) -> tuple:
        self.punct("(")
        values = [self.number()]
        for _ in range(5):
            self.punct(",")
            values.append(self.number())
        self.punct(")")
        return tuple(values)


def _check_statement(stmt: Statement) -> None:
    if stmt.post.component != stmt.pre.component:
        raise SemanticError(
            f"statement changes {stmt.pre.component!r} but names {stmt.post.component!r} as its result",
            stmt.span,
        )
    if stmt.verb is Verb.MOVE and stmt.with_clause is not None and stmt.with_clause.wrench is not None:
        raise SemanticError("move primitives carry no wrench", stmt.span)


def parse(text: str) -> Ast:
    return _Parser(text).program()
