"""Static checks on a parsed model."""

from __future__ import annotations

from ..term import ARITY
from .ast import (
    Assignment, Authentication, Call, Diagnostic, Generates,
    Knows, Leaks, MessageLine, ModelAST, Name, PhaseMarker, Power,
    PrincipalBlock,
)

DISCARD = "_"


def expr_names(e) -> list[Name]:
    if isinstance(e, Name):
        return [e]
    if isinstance(e, Power):
        return expr_names(e.base) + expr_names(e.exponent)
    if isinstance(e, Call):
        return [n for a in e.args for n in expr_names(a)]
    return []


def _calls(e):
    if isinstance(e, Call):
        yield e
        for a in e.args:
            yield from _calls(a)
    elif isinstance(e, Power):
        yield from _calls(e.base)
        yield from _calls(e.exponent)


def arity_problems(stmt: Assignment) -> list[tuple[tuple[int, int], str]]:
    """Arity issues in one assignment; shared with the compiler."""
    out = []
    for call in _calls(stmt.expr):
        want = ARITY.get(call.prim)
        if want is not None and len(call.args) != want:
            out.append((call.pos, f"{call.prim} expects {want} arguments, got {len(call.args)}"))
    multi = len(stmt.targets) > 1
    if multi and not (isinstance(stmt.expr, Call) and stmt.expr.prim == "HKDF"):
        what = stmt.expr.prim if isinstance(stmt.expr, Call) else "this expression"
        out.append((stmt.pos, f"arity mismatch: {what} yields one output, "
                              f"{len(stmt.targets)} targets given"))
    return out


def validate(ast: ModelAST) -> list[Diagnostic]:
    diags: list[Diagnostic] = []

    def report(pos, msg):
        diags.append(Diagnostic(pos[0], pos[1], msg))

    defined: dict[str, set[str]] = {}
    owner_of: dict[str, tuple[str, tuple[int, int]]] = {}
    visibility: dict[str, str] = {}
    everywhere: set[str] = set()
    last_phase = 0

    def define(principal, name, pos):
        if name == DISCARD:
            return
        if name in owner_of or name in visibility:
            first = owner_of.get(name)
            where = f" (first defined at line {first[1][0]})" if first else ""
            report(pos, f"duplicate definition of {name!r}{where}")
        else:
            owner_of[name] = (principal, pos)
        defined[principal].add(name)
        everywhere.add(name)

    def use(principal, name, pos):
        if name not in defined.get(principal, ()):
            report(pos, f"use before definition: {name!r} is not known to {principal}")

    for item in ast.items:
        if isinstance(item, PrincipalBlock):
            p = item.name
            defined.setdefault(p, set())
            for stmt in item.statements:
                if isinstance(stmt, Generates):
                    for n in stmt.names:
                        define(p, n, stmt.pos)
                elif isinstance(stmt, Knows):
                    for n in stmt.names:
                        if n in owner_of:
                            report(stmt.pos, f"duplicate definition of {n!r}")
                        elif visibility.setdefault(n, stmt.visibility) != stmt.visibility:
                            report(stmt.pos, f"{n!r} is known both publicly and privately")
                        defined[p].add(n)
                        everywhere.add(n)
                elif isinstance(stmt, Assignment):
                    for ref in expr_names(stmt.expr):
                        use(p, ref.id, ref.pos)
                    for pos, msg in arity_problems(stmt):
                        report(pos, msg)
                    for n in stmt.targets:
                        define(p, n, stmt.pos)
                elif isinstance(stmt, Leaks):
                    for n in stmt.names:
                        use(p, n, stmt.pos)
        elif isinstance(item, MessageLine):
            if item.sender == item.receiver:
                report(item.pos, f"{item.sender} sends a message to itself")
            for slot in item.slots:
                use(item.sender, slot.name, slot.pos)
                defined.setdefault(item.receiver, set()).add(slot.name)
        elif isinstance(item, PhaseMarker):
            if item.phase <= last_phase:
                report(item.pos, f"phase {item.phase} does not increase on phase {last_phase}")
            last_phase = max(last_phase, item.phase)

    for q in ast.queries:
        if q.name not in everywhere:
            report(q.pos, f"unknown identifier in query: {q.name!r}")
            continue
        if isinstance(q, Authentication):
            carried = any(
                m.sender == q.sender and m.receiver == q.receiver
                and any(s.name == q.name for s in m.slots)
                for m in ast.messages
            )
            if not carried:
                report(q.pos, f"authentication query: no message from {q.sender} "
                              f"to {q.receiver} carries {q.name!r}")
    return diags
