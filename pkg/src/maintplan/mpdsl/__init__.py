"""The manipulation-primitive language: grammar, parser, serializer, validator, interpreter."""

from .interpret import interpret, lower
from .parser import Ast, ParseError, SemanticError, Span, State, Statement, WithClause, grammar_text, parse, tokenize
from .serialize import format_ast, serialize
from .validate import Diagnostic, validate

__all__ = [
    "Ast",
    "Diagnostic",
    "ParseError",
    "SemanticError",
    "Span",
    "State",
    "Statement",
    "WithClause",
    "format_ast",
    "grammar_text",
    "interpret",
    "lower",
    "parse",
    "serialize",
    "tokenize",
    "validate",
]
