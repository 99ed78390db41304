"""Rendering primitives and ASTs as program text."""

from __future__ import annotations

import math
from typing import Iterable

from ..hmp import WORLD, ZERO_WRENCH, ManipulationPrimitive, default_poses
from .parser import Ast, Statement


def format_number(x: float) -> str:
    x = float(x)
    if not math.isfinite(x):
        raise ValueError(f"{x} cannot be written in a program")
    return repr(x)


def _tuple6(values) -> str:
    return "(" + ", ".join(format_number(v) for v in values) + ")"


def _pose(p) -> str:
    return p if isinstance(p, str) else "pose" + _tuple6(p)


def _render(post, verb, tool, params, pre, component, clause) -> str:
    args = ", ".join([tool, *params])
    text = f"{post}({component}) <= {verb}[{args}, {pre}({component})]"
    if clause is not None:
        from_pose, to_pose, frame, wrench = clause
        text += f" with(from={_pose(from_pose)}, to={_pose(to_pose)}, frame={frame}"
        if wrench is not None:
            text += f", wrench={_tuple6(wrench)}"
        text += ")"
    return text + ";"


def primitive_clause(mp: ManipulationPrimitive):
    """The with-clause contents, or None when every binding is a default."""
    start, end = default_poses(mp.component)
    wrench = None if mp.wrench in (None, ZERO_WRENCH) else mp.wrench
    if (mp.from_pose, mp.to_pose, mp.frame, wrench) == (start, end, WORLD, None):
        return None
    return mp.from_pose, mp.to_pose, mp.frame, wrench


def serialize(primitives: Iterable[ManipulationPrimitive]) -> str:
    """One statement per primitive and line, in order."""
    lines = [
        _render(mp.post, mp.verb, mp.tool, mp.tool_params, mp.pre, mp.component, primitive_clause(mp))
        for mp in primitives
    ]
    return "".join(line + "\n" for line in lines)


def format_statement(s: Statement) -> str:
    c = s.with_clause
    clause = None if c is None else (c.from_pose, c.to_pose, c.frame, c.wrench)
    return _render(s.post.sdof, s.verb, s.tool, s.tool_params, s.pre.sdof, s.pre.component, clause)


def format_ast(ast: Ast) -> str:
    return "".join(format_statement(s) + "\n" for s in ast.statements)
