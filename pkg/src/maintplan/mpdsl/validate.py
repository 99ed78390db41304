"""Static checks of a program against an assembly and a tool catalog."""

from __future__ import annotations

from dataclasses import dataclass

from ..hmp import Verb
from ..sda import SdaConfig, SdofLabel, build_relation_graph
from .parser import Ast, Span


@dataclass(frozen=True)
class Diagnostic:
    code: str  # unknown-component | unknown-tool | chain | removed
    message: str
    span: Span | None = None

    def __str__(self):
        where = f"{self.span}: " if self.span else ""
        return f"{where}{self.code}: {self.message}"


def validate(ast: Ast, model, tools=None, cfg: SdaConfig | None = None) -> list[Diagnostic]:
    """Diagnostics in program order; an empty list means the program is executable.

    Each component's first statement must start from the label the residual
    assembly gives it at that point, and every later statement must start
    where the previous one on that component left it.
    """
    cfg = cfg or SdaConfig()
    report: list[Diagnostic] = []
    labels: dict[str, SdofLabel] = {}
    removed: set[str] = set()
    for stmt in ast.statements:
        c = stmt.pre.component
        if c not in model.components:
            report.append(Diagnostic("unknown-component", f"no component {c!r} in the assembly", stmt.span))
            continue
        if tools is not None and stmt.tool not in tools:
            report.append(Diagnostic("unknown-tool", f"tool {stmt.tool!r} is not in the catalog", stmt.span))
        if c in removed:
            report.append(Diagnostic("removed", f"{c!r} was already removed", stmt.span))
            continue
        if c not in labels:
            labels[c] = build_relation_graph(model.without(removed), cfg).labels[c]
        if labels[c] is not stmt.pre.sdof:
            report.append(
                Diagnostic(
                    "chain",
                    f"{stmt.verb} expects {stmt.pre.sdof}({c}) but the state is {labels[c]}({c})",
                    stmt.span,
                )
            )
        labels[c] = stmt.post.sdof
        if stmt.post.sdof is SdofLabel.FREE and stmt.verb in (Verb.PULL, Verb.MOVE):
            removed.add(c)
    return report
