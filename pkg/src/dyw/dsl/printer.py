"""Pretty-printer producing canonical ``.dym`` text."""

from __future__ import annotations

from .ast import (
    Assignment, Call, Generates, Generator, Knows, Leaks, MessageLine,
    ModelAST, Name, PhaseMarker, Power, PrincipalBlock,
)


def format_expr(e) -> str:
    if isinstance(e, Generator):
        return "G"
    if isinstance(e, Name):
        return e.id
    if isinstance(e, Power):
        rhs = format_expr(e.exponent)
        # '^' is left-associative, so a nested right operand needs no parens
        # only when it is atomic; the grammar has no parens, so we never emit them.
        return f"{format_expr(e.base)}^{rhs}"
    if isinstance(e, Call):
        return f"{e.prim}({', '.join(format_expr(a) for a in e.args)})"
    raise TypeError(e)


def _statement(s) -> str:
    if isinstance(s, Generates):
        return "generates " + ", ".join(s.names)
    if isinstance(s, Knows):
        return f"knows {s.visibility} " + ", ".join(s.names)
    if isinstance(s, Leaks):
        return "leaks " + ", ".join(s.names)
    if isinstance(s, Assignment):
        return f"{', '.join(s.targets)} = {format_expr(s.expr)}"
    raise TypeError(s)


def format_model(ast: ModelAST) -> str:
    out = [f"attacker[{ast.attacker}]", ""]
    for item in ast.items:
        if isinstance(item, PrincipalBlock):
            out.append(f"principal {item.name}[")
            out.extend("    " + _statement(s) for s in item.statements)
            out.append("]")
        elif isinstance(item, MessageLine):
            slots = ", ".join(f"[{s.name}]" if s.guarded else s.name for s in item.slots)
            out.append(f"{item.sender} -> {item.receiver}: {slots}")
        elif isinstance(item, PhaseMarker):
            out.append(f"phase[{item.phase}]")
        out.append("")
    if ast.queries:
        out.append("queries[")
        out.extend(f"    {q}" for q in ast.queries)
        out.append("]")
    return "\n".join(out) + "\n"
