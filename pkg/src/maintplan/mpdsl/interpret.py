"""Lowering parsed programs to primitive records and handing them to an executor."""

from __future__ import annotations

from typing import Callable

from ..errors import ValidationFailed
from ..hmp import ManipulationPrimitive
from .parser import Ast, Statement
from .validate import validate


def lower(stmt: Statement) -> ManipulationPrimitive:
    c = stmt.with_clause
    bindings = {}
    if c is not None:
        bindings = {"from_pose": c.from_pose, "to_pose": c.to_pose, "frame": c.frame, "wrench": c.wrench}
    return ManipulationPrimitive(
        stmt.verb,
        stmt.tool,
        stmt.pre.component,
        stmt.pre.sdof,
        stmt.post.sdof,
        stmt.tool_params,
        **bindings,
    )


def interpret(
    ast: Ast,
    on_primitive: Callable[[int, ManipulationPrimitive], None] | None = None,
    model=None,
    tools=None,
    cfg=None,
) -> list[ManipulationPrimitive]:
    """Primitives in program order, each passed to ``on_primitive`` as it is produced.

    With a model (and optionally a tool catalog) the program is validated
    first and nothing is executed if any diagnostic is raised.
    """
    if model is not None:
        report = validate(ast, model, tools, cfg)
        if report:
            raise ValidationFailed(report)
    out = []
    for i, stmt in enumerate(ast.statements):
        mp = lower(stmt)
        out.append(mp)
        if on_primitive is not None:
            on_primitive(i, mp)
    return out
