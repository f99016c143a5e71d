"""Query evaluation, verdicts and the analysis pipeline."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional

from ..dsl import ParseError, compile_model, parse, validate
from ..dsl.ast import Authentication, Confidentiality, ModelAST, Query
from ..dsl.compile import CompileError, ExecutablePlan
from .explore import (
    DEFAULT_CAP, DEFAULT_MAX_MUTATIONS, Event, Execution, Explorer, Mutation,
)
from .knowledge import DEFAULT_BUDGET, Derivation

PROVED = "Proved"
VIOLATED = "Violated"


class AnalysisError(Exception):
    def __init__(self, stage: str, message: str, diagnostics=()):
        self.stage = stage
        self.diagnostics = list(diagnostics)
        super().__init__(f"{stage}: {message}")


@dataclass
class Trace:
    model: str
    query: str
    strategy: list[Mutation]
    events: list[Event]
    derivation: Optional[Derivation]


@dataclass
class Verdict:
    query: Query
    result: str
    trace: Optional[Trace] = None

    @property
    def violated(self) -> bool:
        return self.result == VIOLATED


def auth_slots(plan: ExecutablePlan, q: Authentication) -> set[tuple[int, int]]:
    return {
        (m.index, k)
        for m in plan.messages if m.sender == q.sender and m.receiver == q.receiver
        for k, (name, _) in enumerate(m.slots) if name == q.name
    }


def violation(plan: ExecutablePlan, ex: Execution, q: Query):
    """``None`` if ``ex`` respects ``q``; otherwise evidence (derivation or accept)."""
    if isinstance(q, Confidentiality):
        owner = plan.definer(q.name)
        value = ex.bindings.get(owner, {}).get(q.name)
        if value is None:
            return None
        return ex.kb.derive(value, ex.phase)
    carried = auth_slots(plan, q)
    tampered = ex.mutated
    if not tampered:
        return None
    for acc in ex.accepts:
        if acc.principal == q.receiver and acc.deps & carried and acc.deps & tampered:
            return acc
    return None


def _minimality(ex: Execution):
    return (
        len(ex.strategy),
        tuple((m.message, m.slot) for m in ex.strategy),
        tuple(m.rank for m in ex.strategy),
    )


def check_query(plan: ExecutablePlan, executions: Iterable[Execution], q: Query,
                model: str = "") -> Verdict:
    return check_queries(plan, executions, [q], model)[0]


def check_queries(plan: ExecutablePlan, executions: Iterable[Execution],
                  queries, model: str = "") -> list[Verdict]:
    queries = list(queries)
    best: list[Optional[tuple]] = [None] * len(queries)
    for ex in executions:
        key = _minimality(ex)
        for n, q in enumerate(queries):
            if best[n] is not None and best[n][0] <= key:
                continue
            evidence = violation(plan, ex, q)
            if evidence is not None:
                best[n] = (key, ex, evidence)
    verdicts = []
    for q, hit in zip(queries, best):
        if hit is None:
            verdicts.append(Verdict(q, PROVED))
            continue
        _, ex, evidence = hit
        events = list(ex.events)
        derivation = None
        if isinstance(evidence, Derivation):
            derivation = evidence
            events.append(Event("derive", None, q.name, evidence.term, ex.phase))
        verdicts.append(Verdict(q, VIOLATED, Trace(model, str(q), list(ex.strategy),
                                                   events, derivation)))
    return verdicts


def prepare(source, mode: Optional[str] = None) -> ExecutablePlan:
    try:
        ast = source if isinstance(source, ModelAST) else parse(source)
    except ParseError as exc:
        raise AnalysisError("parse", str(exc), exc.diagnostics) from exc
    diags = validate(ast)
    if diags:
        raise AnalysisError("validate", "; ".join(map(str, diags)), diags)
    try:
        plan = compile_model(ast)
    except CompileError as exc:
        raise AnalysisError("compile", str(exc)) from exc
    if mode:
        plan.attacker = mode
    return plan


def analyze(source, *, mode: Optional[str] = None, model: str = "",
            cap: int = DEFAULT_CAP, budget: int = DEFAULT_BUDGET,
            max_mutations: int = DEFAULT_MAX_MUTATIONS) -> list[Verdict]:
    """Parse (if needed), check, compile, explore, and judge every query."""
    plan = prepare(source, mode)
    explorer = Explorer(plan, max_mutations=max_mutations, cap=cap, budget=budget)
    return check_queries(plan, explorer.run(), plan.queries, model)
