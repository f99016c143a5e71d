"""Running a plan under a passive or bounded active attacker."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Optional

from ..dsl.compile import (
    DISCARD, Apply, Compute, ExecutablePlan, Generate, Know, Leak, LExpr,
    Output, PhaseAdvance, Raise, Receive, Send, evaluate,
)
from ..term import G, AttackerValue, Const, Fresh, Prim, Term, exp
from .knowledge import DEFAULT_BUDGET, KnowledgeBase

DEFAULT_CAP = 10**5
DEFAULT_MAX_MUTATIONS = 2

ATTACKER_EXPONENT = AttackerValue("mal")
ATTACKER_NONCE = AttackerValue("nonce")
ATTACKER_PUBKEY = exp(G, ATTACKER_EXPONENT)

ACCEPTING = frozenset({"AEAD_DEC", "SIGNVERIF", "DEC"})


class StrategySpaceError(RuntimeError):
    def __init__(self, cap: int, lines: list[int]):
        self.cap = cap
        self.lines = lines
        where = ", ".join(str(n) for n in lines) or "none"
        super().__init__(f"strategy space exceeds cap of {cap} executions; "
                         f"branching messages on lines {where}")


class ReplayError(RuntimeError):
    pass


@dataclass(frozen=True)
class Mutation:
    message: int
    slot: int
    kind: str  # pubkey | fresh | replay | resynth
    term: Term
    rank: int


@dataclass(frozen=True)
class Event:
    kind: str  # observe | mutate | leak | derive
    message_index: Optional[int]
    slot: Optional[str]
    term: Term
    phase: int
    replaced: Optional[Term] = None
    principal: Optional[str] = None


@dataclass(frozen=True)
class Accept:
    principal: str
    line: int
    deps: frozenset


@dataclass
class Execution:
    kb: KnowledgeBase
    strategy: list[Mutation] = field(default_factory=list)
    bindings: dict[str, dict[str, Term]] = field(default_factory=dict)
    deps: dict[str, dict[str, frozenset]] = field(default_factory=dict)
    aborted: dict[str, str] = field(default_factory=dict)
    events: list[Event] = field(default_factory=list)
    accepts: list[Accept] = field(default_factory=list)
    sent: dict[tuple[int, int], Term] = field(default_factory=dict)
    received: dict[tuple[int, int], Term] = field(default_factory=dict)
    phase: int = 0

    def copy(self) -> "Execution":
        return Execution(
            self.kb.copy(), list(self.strategy),
            {p: dict(b) for p, b in self.bindings.items()},
            {p: dict(d) for p, d in self.deps.items()},
            dict(self.aborted), list(self.events), list(self.accepts),
            dict(self.sent), dict(self.received), self.phase,
        )

    @property
    def mutated(self) -> set[tuple[int, int]]:
        return {(m.message, m.slot) for m in self.strategy}


def _has_accepting(e: LExpr) -> bool:
    if isinstance(e, Apply):
        return e.prim in ACCEPTING or any(_has_accepting(a) for a in e.args)
    if isinstance(e, Raise):
        return _has_accepting(e.base) or _has_accepting(e.exponent)
    if isinstance(e, Output):
        return _has_accepting(e.source)
    return False


def same_shape(a: Term, b: Term) -> bool:
    if a.tag != b.tag:
        return False
    if isinstance(a, Prim):
        return a.name == b.name
    return True


class Explorer:
    """Depth-first enumeration of the bounded strategy space.

    Every unguarded slot of a delivered message may be left alone or replaced
    by one of: the attacker's DH public key, a fresh attacker nonce, a known
    term of the same shape, or the sender's own expression re-evaluated over
    earlier replacements in the same message.  At most ``max_mutations`` slots
    are replaced per execution.
    """

    def __init__(self, plan: ExecutablePlan, mode: Optional[str] = None, *,
                 max_mutations: int = DEFAULT_MAX_MUTATIONS, cap: int = DEFAULT_CAP,
                 budget: int = DEFAULT_BUDGET,
                 fixed: Optional[dict[tuple[int, int], Mutation]] = None):
        self.plan = plan
        self.mode = mode or plan.attacker
        self.max_mutations = max_mutations
        self.cap = cap
        self.budget = budget
        self.fixed = fixed
        self.count = 0
        self.branching: set[int] = set()
        self.defs: dict[tuple[str, str], LExpr] = {}
        for step in plan.steps:
            if isinstance(step, Compute):
                for name, e in zip(step.targets, step.output_exprs()):
                    self.defs[(step.principal, name)] = e

    # -- driver ---------------------------------------------------------------
    def initial(self) -> Execution:
        kb = KnowledgeBase(self.budget)
        for t in (G, ATTACKER_EXPONENT, ATTACKER_NONCE):
            kb.add(t, 0, "initial")
        for name in sorted(self.plan.public):
            kb.add(Const(name), 0, "initial")
        return Execution(kb, bindings={p: {} for p in self.plan.principals},
                         deps={p: {} for p in self.plan.principals})

    def run(self) -> Iterator[Execution]:
        self.count = 0
        yield from self._walk(self.initial(), 0)

    def _walk(self, ex: Execution, i: int) -> Iterator[Execution]:
        steps = self.plan.steps
        while i < len(steps):
            step = steps[i]
            if isinstance(step, Receive) and self._branches(ex, step):
                yield from self._choose(ex, i, step, 0, [])
                return
            self.apply(ex, step)
            i += 1
        self.count += 1
        if self.count > self.cap:
            lines = sorted(self.plan.message_lines(self.branching))
            raise StrategySpaceError(self.cap, lines)
        yield ex

    def _branches(self, ex: Execution, step: Receive) -> bool:
        if (step.index, 0) not in ex.sent or step.receiver in ex.aborted:
            return False
        if self.fixed is not None:
            return True
        return self.mode == "active" and any(not g for _, g in step.slots)

    def _choose(self, ex: Execution, i: int, step: Receive, k: int,
                picked: list[Term]) -> Iterator[Execution]:
        if k == len(step.slots):
            self.deliver(ex, step, picked)
            yield from self._walk(ex, i + 1)
            return
        options = self.candidates(ex, step, k, picked)
        if len(options) > 1:
            self.branching.add(step.index)
        for kind, term, rank in options:
            branch = ex if len(options) == 1 else ex.copy()
            if kind != "original":
                branch.strategy.append(Mutation(step.index, k, kind, term, rank))
                branch.events.append(Event(
                    "mutate", step.index, step.slots[k][0], term, branch.phase,
                    replaced=ex.sent[(step.index, k)]))
            yield from self._choose(branch, i, step, k + 1, picked + [term])

    # -- candidates -----------------------------------------------------------
    def candidates(self, ex: Execution, step: Receive, k: int,
                   picked: list[Term]) -> list[tuple[str, Term, int]]:
        original = ex.sent[(step.index, k)]
        if self.fixed is not None:
            chosen = self.fixed.get((step.index, k))
            if chosen is None or chosen.term == original:
                return [("original", original, 0)]
            if step.slots[k][1] or not ex.kb.derivable(chosen.term):
                raise ReplayError(f"message {step.index} slot {k}: replacement "
                                  f"not available to the attacker when delivered")
            return [(chosen.kind, chosen.term, chosen.rank)]
        name, guarded = step.slots[k]
        if guarded or len(ex.strategy) >= self.max_mutations:
            return [("original", original, 0)]
        out: list[tuple[str, Term, int]] = [("original", original, 0)]
        seen = {original}

        def offer(kind, t):
            if t is not None and t not in seen:
                seen.add(t)
                out.append((kind, t, len(out)))

        offer("pubkey", ATTACKER_PUBKEY)
        offer("fresh", ATTACKER_NONCE)
        for t in ex.kb:
            if same_shape(t, original):
                offer("replay", t)
        offer("resynth", self._resynth(ex, step, k, picked))
        return out

    def _resynth(self, ex: Execution, step: Receive, k: int,
                 picked: list[Term]) -> Optional[Term]:
        swapped = {
            step.slots[j][0]: picked[j]
            for j in range(k) if picked[j] != ex.sent[(step.index, j)]
        }
        if not swapped:
            return None
        sender = step.sender
        cache: dict[str, Term] = {}

        def value(name: str) -> Term:
            if name in swapped:
                return swapped[name]
            if name not in cache:
                e = self.defs.get((sender, name))
                cache[name] = ex.bindings[sender][name] if e is None else evaluate(e, value)[0]
            return cache[name]

        try:
            term = value(step.slots[k][0])
        except KeyError:
            return None
        return term if ex.kb.derivable(term) else None

    # -- step semantics -------------------------------------------------------
    def deliver(self, ex: Execution, step: Receive, terms: list[Term]) -> None:
        if step.receiver in ex.aborted:
            return
        for k, ((name, _), t) in enumerate(zip(step.slots, terms)):
            ex.received[(step.index, k)] = t
            ex.bindings[step.receiver][name] = t
            ex.deps[step.receiver][name] = frozenset({(step.index, k)})

    def apply(self, ex: Execution, step) -> None:
        if isinstance(step, PhaseAdvance):
            ex.phase = step.phase
            return
        if isinstance(step, Receive):
            if (step.index, 0) in ex.sent:
                self.deliver(ex, step, [ex.sent[(step.index, k)] for k in range(len(step.slots))])
            return
        who = step.sender if isinstance(step, Send) else step.principal
        if who in ex.aborted:
            return
        env = ex.bindings[who]
        if isinstance(step, Generate):
            env[step.name] = Fresh(who, step.name)
        elif isinstance(step, Know):
            if step.visibility == "public":
                env[step.name] = Const(step.name)
            else:
                env[step.name] = Fresh("", step.name)
        elif isinstance(step, Compute):
            self._compute(ex, step)
        elif isinstance(step, Send):
            if any(name not in env for name, _ in step.slots):
                ex.aborted[who] = f"blocked before message {step.index}"
                return
            for k, (name, _) in enumerate(step.slots):
                t = env[name]
                ex.sent[(step.index, k)] = t
                ex.kb.add(t, ex.phase, "observe")
                ex.events.append(Event("observe", step.index, name, t, ex.phase))
        elif isinstance(step, Leak):
            for name in step.names:
                if name in env:
                    ex.kb.add(env[name], ex.phase, "leak")
                    ex.events.append(Event("leak", None, name, env[name], ex.phase, principal=who))

    def _compute(self, ex: Execution, step: Compute) -> None:
        who = step.principal
        env, deps = ex.bindings[who], ex.deps[who]
        used: set = set()

        def lookup(name: str) -> Term:
            used.update(deps.get(name, ()))
            return env[name]

        outputs = []
        try:
            for e in step.output_exprs():
                t, ok = evaluate(e, lookup)
                if not ok:
                    ex.aborted[who] = f"check failed on line {step.line}"
                    return
                outputs.append(t)
        except KeyError as missing:
            ex.aborted[who] = f"blocked on line {step.line}: {missing.args[0]} unavailable"
            return
        dep = frozenset(used)
        for name, t in zip(step.targets, outputs):
            if name != DISCARD:
                env[name] = t
                deps[name] = dep
        if _has_accepting(step.expr):
            ex.accepts.append(Accept(who, step.line, dep))


def explore(plan: ExecutablePlan, mode: Optional[str] = None, **kw) -> list[Execution]:
    return list(Explorer(plan, mode, **kw).run())


def replay(plan: ExecutablePlan, strategy, mode: Optional[str] = None, **kw) -> Execution:
    """Re-run ``plan`` with exactly the replacements in ``strategy``."""
    fixed = {(m.message, m.slot): m for m in strategy}
    runs = list(Explorer(plan, mode, fixed=fixed, **kw).run())
    assert len(runs) == 1
    return runs[0]
