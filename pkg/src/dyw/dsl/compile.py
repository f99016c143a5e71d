"""Lowering of a validated model to an executable step list.

Expressions are lowered to small closure-free trees (``Ref``, ``Gen``,
``Apply``, ``Raise``, ``Output``) that the engine evaluates against a
principal's bindings with the term smart constructors.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Union

from .. import term as T
from .ast import (
    Assignment, Call, Generates, Generator, Knows, Leaks,
    MessageLine, ModelAST, Name, PhaseMarker, Power, PrincipalBlock, Query,
)
from .validate import DISCARD, arity_problems


class CompileError(ValueError):
    def __init__(self, line: int, col: int, message: str):
        self.line, self.col = line, col
        super().__init__(f"{line}:{col}: {message}")


# -- lowered expressions ------------------------------------------------------

@dataclass(frozen=True)
class Ref:
    name: str


@dataclass(frozen=True)
class Gen:
    pass


@dataclass(frozen=True)
class Apply:
    prim: str
    args: tuple["LExpr", ...]


@dataclass(frozen=True)
class Raise:
    base: "LExpr"
    exponent: "LExpr"


@dataclass(frozen=True)
class Output:
    index: int
    source: "LExpr"


LExpr = Union[Ref, Gen, Apply, Raise, Output]


def evaluate(e: LExpr, lookup: Callable[[str], T.Term]) -> tuple[T.Term, bool]:
    """Evaluate ``e``; the flag is False if a checked primitive failed."""
    ok = True

    def go(node) -> T.Term:
        nonlocal ok
        if isinstance(node, Ref):
            return lookup(node.name)
        if isinstance(node, Gen):
            return T.G
        if isinstance(node, Raise):
            return T.exp(go(node.base), go(node.exponent))
        if isinstance(node, Output):
            return T.proj(node.index, go(node.source))
        args = [go(a) for a in node.args]
        out = T.prim(node.prim, *args)
        if node.prim == "SIGNVERIF" and out != T.TRUE:
            ok = False
        elif node.prim == "AEAD_DEC" and isinstance(out, T.Prim) and out.name == "AEAD_DEC":
            ok = False
        return out

    return go(e), ok


def refs(e: LExpr) -> set[str]:
    if isinstance(e, Ref):
        return {e.name}
    if isinstance(e, Apply):
        return set().union(*(refs(a) for a in e.args))
    if isinstance(e, Raise):
        return refs(e.base) | refs(e.exponent)
    if isinstance(e, Output):
        return refs(e.source)
    return set()


def substitute(e: LExpr, env: dict[str, LExpr]) -> LExpr:
    if isinstance(e, Ref):
        return env.get(e.name, e)
    if isinstance(e, Apply):
        return Apply(e.prim, tuple(substitute(a, env) for a in e.args))
    if isinstance(e, Raise):
        return Raise(substitute(e.base, env), substitute(e.exponent, env))
    if isinstance(e, Output):
        return Output(e.index, substitute(e.source, env))
    return e


def is_checked(e: LExpr) -> bool:
    if isinstance(e, Apply):
        return e.prim in T.CHECKED or any(is_checked(a) for a in e.args)
    if isinstance(e, Raise):
        return is_checked(e.base) or is_checked(e.exponent)
    if isinstance(e, Output):
        return is_checked(e.source)
    return False


def _lower(e) -> LExpr:
    if isinstance(e, Name):
        return Ref(e.id)
    if isinstance(e, Generator):
        return Gen()
    if isinstance(e, Power):
        return Raise(_lower(e.base), _lower(e.exponent))
    if isinstance(e, Call):
        applied = Apply(e.prim, tuple(_lower(a) for a in e.args))
        # a bare HKDF use means its first output
        return Output(0, applied) if e.prim == "HKDF" else applied
    raise TypeError(e)


# -- plan steps ---------------------------------------------------------------

@dataclass(frozen=True)
class Generate:
    principal: str
    name: str


@dataclass(frozen=True)
class Know:
    principal: str
    name: str
    visibility: str


@dataclass(frozen=True)
class Compute:
    principal: str
    targets: tuple[str, ...]
    expr: LExpr
    checked: bool
    line: int = 0

    def output_exprs(self) -> list[LExpr]:
        """Per-target lowered expression (HKDF targets become projections)."""
        if len(self.targets) == 1:
            return [self.expr]
        src = self.expr.source  # multi-target is always Output(0, HKDF)
        return [Output(i, src) for i in range(len(self.targets))]


@dataclass(frozen=True)
class Send:
    index: int
    sender: str
    receiver: str
    slots: tuple[tuple[str, bool], ...]
    line: int = 0


@dataclass(frozen=True)
class Receive:
    index: int
    sender: str
    receiver: str
    slots: tuple[tuple[str, bool], ...]


@dataclass(frozen=True)
class Leak:
    principal: str
    names: tuple[str, ...]


@dataclass(frozen=True)
class PhaseAdvance:
    phase: int


Step = Union[Generate, Know, Compute, Send, Receive, Leak, PhaseAdvance]


@dataclass
class ExecutablePlan:
    attacker: str
    steps: list[Step]
    queries: tuple[Query, ...]
    principals: list[str]
    messages: list[Send] = field(default_factory=list)
    public: set[str] = field(default_factory=set)

    def message_lines(self, indices) -> list[int]:
        return [self.messages[i].line for i in indices]

    def definition(self, principal: str, name: str) -> LExpr | None:
        """Lowered expression a principal assigned to ``name``, if any."""
        for step in self.steps:
            if isinstance(step, Compute) and step.principal == principal and name in step.targets:
                return step.output_exprs()[step.targets.index(name)]
        return None

    def definer(self, name: str) -> str | None:
        """The principal that originates ``name`` (generates or computes it)."""
        for step in self.steps:
            if isinstance(step, Generate) and step.name == name:
                return step.principal
            if isinstance(step, Compute) and name in step.targets:
                return step.principal
            if isinstance(step, Know) and step.name == name:
                return step.principal
        return None


def compile_model(ast: ModelAST) -> ExecutablePlan:
    steps: list[Step] = []
    messages: list[Send] = []
    public: set[str] = set()
    for item in ast.items:
        if isinstance(item, PrincipalBlock):
            p = item.name
            for stmt in item.statements:
                if isinstance(stmt, Generates):
                    steps.extend(Generate(p, n) for n in stmt.names)
                elif isinstance(stmt, Knows):
                    steps.extend(Know(p, n, stmt.visibility) for n in stmt.names)
                    if stmt.visibility == "public":
                        public.update(stmt.names)
                elif isinstance(stmt, Assignment):
                    problems = arity_problems(stmt)
                    if problems:
                        (line, col), msg = problems[0]
                        raise CompileError(line, col, msg)
                    lowered = _lower(stmt.expr)
                    steps.append(Compute(p, stmt.targets, lowered, is_checked(lowered), stmt.pos[0]))
                elif isinstance(stmt, Leaks):
                    steps.append(Leak(p, stmt.names))
        elif isinstance(item, MessageLine):
            slots = tuple((s.name, s.guarded) for s in item.slots)
            send = Send(len(messages), item.sender, item.receiver, slots, item.pos[0])
            messages.append(send)
            steps.append(send)
            steps.append(Receive(send.index, item.sender, item.receiver, slots))
        elif isinstance(item, PhaseMarker):
            steps.append(PhaseAdvance(item.phase))
    return ExecutablePlan(ast.attacker, steps, ast.queries, ast.principals, messages, public)


__all__ = [
    "Apply", "Compute", "CompileError", "ExecutablePlan", "Gen", "Generate",
    "Know", "Leak", "Output", "PhaseAdvance", "Raise", "Receive", "Ref", "Send",
    "DISCARD", "compile_model", "evaluate", "is_checked", "refs", "substitute",
]
