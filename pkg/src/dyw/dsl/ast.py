"""Syntax tree for ``.dym`` protocol models.

Every node carries the 1-based ``(line, col)`` where it starts.  Positions are
excluded from equality so that a pretty-printed and re-parsed model compares
equal to the original.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

Pos = tuple[int, int]


def _pos() -> Pos:
    return field(default=(0, 0), compare=False, repr=False)


@dataclass(frozen=True)
class Diagnostic:
    line: int
    col: int
    message: str

    def __str__(self) -> str:
        return f"{self.line}:{self.col}: {self.message}"


# -- expressions --------------------------------------------------------------

@dataclass(frozen=True)
class Name:
    id: str
    pos: Pos = _pos()


@dataclass(frozen=True)
class Generator:
    pos: Pos = _pos()


@dataclass(frozen=True)
class Call:
    prim: str
    args: tuple["Expr", ...]
    pos: Pos = _pos()


@dataclass(frozen=True)
class Power:
    base: "Expr"
    exponent: "Expr"
    pos: Pos = _pos()


Expr = Union[Name, Generator, Call, Power]


# -- statements ---------------------------------------------------------------

@dataclass(frozen=True)
class Generates:
    names: tuple[str, ...]
    pos: Pos = _pos()


@dataclass(frozen=True)
class Knows:
    visibility: str  # "public" | "private"
    names: tuple[str, ...]
    pos: Pos = _pos()


@dataclass(frozen=True)
class Assignment:
    targets: tuple[str, ...]
    expr: Expr
    pos: Pos = _pos()


@dataclass(frozen=True)
class Leaks:
    names: tuple[str, ...]
    pos: Pos = _pos()


Statement = Union[Generates, Knows, Assignment, Leaks]


# -- top level ----------------------------------------------------------------

@dataclass(frozen=True)
class PrincipalBlock:
    name: str
    statements: tuple[Statement, ...]
    pos: Pos = _pos()


@dataclass(frozen=True)
class Slot:
    name: str
    guarded: bool = False
    pos: Pos = _pos()


@dataclass(frozen=True)
class MessageLine:
    sender: str
    receiver: str
    slots: tuple[Slot, ...]
    pos: Pos = _pos()


@dataclass(frozen=True)
class PhaseMarker:
    phase: int
    pos: Pos = _pos()


Item = Union[PrincipalBlock, MessageLine, PhaseMarker]


@dataclass(frozen=True)
class Confidentiality:
    name: str
    pos: Pos = _pos()

    def __str__(self) -> str:
        return f"confidentiality? {self.name}"


@dataclass(frozen=True)
class Authentication:
    sender: str
    receiver: str
    name: str
    pos: Pos = _pos()

    def __str__(self) -> str:
        return f"authentication? {self.sender} -> {self.receiver}: {self.name}"


Query = Union[Confidentiality, Authentication]


@dataclass(frozen=True)
class ModelAST:
    attacker: str  # "active" | "passive"
    items: tuple[Item, ...] = ()
    queries: tuple[Query, ...] = ()

    @property
    def principals(self) -> list[str]:
        seen: list[str] = []
        for item in self.items:
            if isinstance(item, PrincipalBlock):
                names = [item.name]
            elif isinstance(item, MessageLine):
                names = [item.sender, item.receiver]
            else:
                continue
            seen.extend(n for n in names if n not in seen)
        return seen

    @property
    def messages(self) -> list[MessageLine]:
        return [i for i in self.items if isinstance(i, MessageLine)]
