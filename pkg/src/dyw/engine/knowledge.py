"""Attacker knowledge and goal-directed derivability."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Optional

from ..term import AttackerValue, Const, Exp, Fresh, Prim, Proj, Term, Tup, render

DEFAULT_BUDGET = 10**6


class InconclusiveError(RuntimeError):
    """The derivability search ran out of budget; distinct from "not derivable"."""


@dataclass(frozen=True)
class Derivation:
    rule: str
    term: Term
    premises: tuple["Derivation", ...] = ()

    def to_json(self) -> dict:
        return {
            "rule": self.rule,
            "term": render(self.term),
            "premises": [p.to_json() for p in self.premises],
        }

    def rules(self) -> list[str]:
        out = [self.rule]
        for p in self.premises:
            out.extend(p.rules())
        return out


class Deducer:
    """Synthesis over a fixed set of known terms, memoized per goal."""

    def __init__(self, known: dict[Term, Derivation], budget: int = DEFAULT_BUDGET):
        self.known = known
        self.budget = budget
        self.memo: dict[Term, Optional[Derivation]] = {}
        self.by_base: dict[Term, list[Exp]] = {}
        for t in known:
            if isinstance(t, Exp):
                self.by_base.setdefault(t.base, []).append(t)
        self._nodes = 0

    def derive(self, goal: Term) -> Optional[Derivation]:
        self._nodes = 0
        return self._synth(goal)

    def _synth(self, goal: Term) -> Optional[Derivation]:
        if goal in self.memo:
            return self.memo[goal]
        self._nodes += 1
        if self._nodes > self.budget:
            raise InconclusiveError(f"derivability budget of {self.budget} nodes exhausted "
                                    f"while deriving {render(goal)[:80]}")
        out = self._attempt(goal)
        self.memo[goal] = out
        return out

    def _all(self, rule: str, goal: Term, parts) -> Optional[Derivation]:
        premises = []
        for p in parts:
            d = self._synth(p)
            if d is None:
                return None
            premises.append(d)
        return Derivation(rule, goal, tuple(premises))

    def _attempt(self, goal: Term) -> Optional[Derivation]:
        if goal in self.known:
            return self.known[goal]
        if isinstance(goal, (Const, AttackerValue)):
            return Derivation("public", goal)
        if isinstance(goal, Fresh):
            return None
        if isinstance(goal, Tup):
            return self._all("tuple", goal, goal.items)
        if isinstance(goal, Prim):
            return self._all(goal.name, goal, goal.args)
        if isinstance(goal, Proj):
            return self._all("project", goal, (goal.source,))
        if isinstance(goal, Exp):
            return self._exp(goal)
        return None

    def _exp(self, goal: Exp) -> Optional[Derivation]:
        # extend a known power of the same base by derivable exponents
        want = Counter(goal.exps)
        for k in self.by_base.get(goal.base, ()):
            have = Counter(k.exps)
            if have <= want and have != want:
                rest = list((want - have).elements())
                d = self._all("exp", goal, rest)
                if d is not None:
                    return Derivation("exp", goal, (self.known[k], *d.premises))
        return self._all("exp", goal, (goal.base, *goal.exps))


class KnowledgeBase:
    """Monotone, decomposition-closed attacker knowledge with phase stamps."""

    def __init__(self, budget: int = DEFAULT_BUDGET):
        self.budget = budget
        self.stamps: dict[Term, int] = {}
        self.origin: dict[Term, Derivation] = {}
        self._sealed: list[Prim] = []  # ciphertexts not yet opened
        self._deducer: Optional[Deducer] = None

    def __contains__(self, t: Term) -> bool:
        return t in self.stamps

    def __len__(self) -> int:
        return len(self.stamps)

    def __iter__(self):
        return iter(self.stamps)

    def copy(self) -> "KnowledgeBase":
        kb = KnowledgeBase(self.budget)
        kb.stamps = dict(self.stamps)
        kb.origin = dict(self.origin)
        kb._sealed = list(self._sealed)
        kb._deducer = self._deducer
        return kb

    def terms_at(self, phase: int) -> set[Term]:
        return {t for t, p in self.stamps.items() if p <= phase}

    def add(self, t: Term, phase: int, how: str = "observe") -> bool:
        """Add ``t`` and close under decomposition; True if anything was new."""
        before = len(self.stamps)
        self._absorb([(t, Derivation(how, t))], phase)
        changed = True
        while changed:
            changed = False
            for c in list(self._sealed):
                key_parts = (c.args[0],) if c.name == "ENC" else (c.args[0], c.args[2])
                premises = [self.derive(k) for k in key_parts]
                if all(p is not None for p in premises):
                    self._sealed.remove(c)
                    rule = "DEC" if c.name == "ENC" else "AEAD_DEC"
                    opened = Derivation(rule, c.args[1], (self.origin[c], *premises))
                    self._absorb([(c.args[1], opened)], phase)
                    changed = True
        return len(self.stamps) > before

    def _absorb(self, work: list[tuple[Term, Derivation]], phase: int) -> None:
        while work:
            t, how = work.pop()
            if t in self.stamps:
                continue
            self.stamps[t] = phase
            self.origin[t] = how
            self._deducer = None
            if isinstance(t, Tup):
                work.extend((x, Derivation("split", x, (how,))) for x in t.items)
            elif isinstance(t, Prim) and t.name in ("ENC", "AEAD_ENC") and len(t.args) >= 2:
                self._sealed.append(t)

    def _deducer_for(self, phase: Optional[int]) -> Deducer:
        if phase is None or all(p <= phase for p in self.stamps.values()):
            if self._deducer is None:
                self._deducer = Deducer(self.origin, self.budget)
            return self._deducer
        visible = {t: d for t, d in self.origin.items() if self.stamps[t] <= phase}
        return Deducer(visible, self.budget)

    def derive(self, goal: Term, phase: Optional[int] = None) -> Optional[Derivation]:
        return self._deducer_for(phase).derive(goal)

    def derivable(self, goal: Term, phase: Optional[int] = None) -> bool:
        return self.derive(goal, phase) is not None


def derivable(kb: KnowledgeBase, goal: Term, phase: Optional[int] = None):
    """``(True, tree)`` if ``goal`` is producible from knowledge at ``phase``."""
    d = kb.derive(goal, phase)
    return d is not None, d
