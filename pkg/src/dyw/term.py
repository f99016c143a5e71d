"""Symbolic term algebra with a Diffie-Hellman aware normal form.

Terms are immutable and hash-consed by structure: two terms compare equal
exactly when their canonical forms are identical.  Raw constructors
(``Exp(...)``, ``Prim(...)``) build terms verbatim; the lowercase smart
constructors (``exp``, ``prim``, ``proj``, ``tup``) apply the rewrite rules
as they go, and :func:`normalize` rebuilds an arbitrary raw term bottom-up
through them.
"""

from __future__ import annotations

from typing import Iterable, Iterator

MAX_DEPTH = 64

PRIMITIVES = frozenset(
    {
        "HASH", "HKDF", "MAC", "HMAC", "ENC", "DEC", "AEAD_ENC", "AEAD_DEC",
        "SIGN", "SIGNVERIF", "PK", "RATCHET",
    }
)

# Fixed arities; everything else is n-ary (at least one argument).
ARITY = {
    "ENC": 2, "DEC": 2, "AEAD_ENC": 3, "AEAD_DEC": 3,
    "SIGN": 2, "SIGNVERIF": 3, "PK": 1, "RATCHET": 1,
}

CHECKED = frozenset({"AEAD_DEC", "SIGNVERIF"})


class TermDepthError(ValueError):
    """Raised when a term would exceed :data:`MAX_DEPTH`."""

    def __init__(self, subterm: "Term"):
        self.subterm = subterm
        super().__init__(f"term depth bound {MAX_DEPTH} exceeded by {render(subterm)[:120]}")


class Term:
    """Base class.  Subclasses fill in ``tag`` and call ``_seal``."""

    __slots__ = ("sort_key", "_hash", "size", "depth")
    tag = -1

    def _seal(self, name: str, ident: str, children: tuple["Term", ...]) -> None:
        self.sort_key = (self.tag, name, ident, tuple(c.sort_key for c in children))
        self.size = 1 + sum(c.size for c in children)
        self.depth = 1 + max((c.depth for c in children), default=0)
        # set last: once present, the term is sealed
        self._hash = hash((self.tag, name, ident, tuple(c._hash for c in children)))

    def children(self) -> tuple["Term", ...]:
        return ()

    def __hash__(self) -> int:
        return self._hash

    def __eq__(self, other: object) -> bool:
        if self is other:
            return True
        if not isinstance(other, Term):
            return NotImplemented
        return self._hash == other._hash and self.sort_key == other.sort_key

    def __lt__(self, other: "Term") -> bool:
        return self.sort_key < other.sort_key

    def __setattr__(self, key, value):
        if hasattr(self, "_hash"):
            raise AttributeError("terms are immutable")
        object.__setattr__(self, key, value)

    def __repr__(self) -> str:
        return f"<{type(self).__name__} {render(self)}>"

    def __str__(self) -> str:
        return render(self)


class Const(Term):
    """A public constant: the generator, the verification constant, or a public name."""

    __slots__ = ("name",)
    tag = 0

    def __init__(self, name: str):
        self.name = name
        self._seal(name, "", ())


class Fresh(Term):
    """A secret value.  ``owner`` is empty for secrets shared via ``knows private``."""

    __slots__ = ("owner", "name")
    tag = 1

    def __init__(self, owner: str, name: str):
        self.owner = owner
        self.name = name
        self._seal(name, owner, ())


class AttackerValue(Term):
    __slots__ = ("name",)
    tag = 2

    def __init__(self, name: str):
        self.name = name
        self._seal(name, "attacker", ())


class Exp(Term):
    """``base`` raised to the product of ``exps`` (kept sorted)."""

    __slots__ = ("base", "exps")
    tag = 3

    def __init__(self, base: Term, exps: Iterable[Term]):
        self.base = base
        self.exps = tuple(exps)
        self._seal("^", "", (base, *self.exps))

    def children(self):
        return (self.base, *self.exps)


class Prim(Term):
    __slots__ = ("name", "args")
    tag = 4

    def __init__(self, name: str, args: Iterable[Term]):
        self.name = name
        self.args = tuple(args)
        self._seal(name, "", self.args)

    def children(self):
        return self.args


class Tup(Term):
    __slots__ = ("items",)
    tag = 5

    def __init__(self, items: Iterable[Term]):
        self.items = tuple(items)
        self._seal("", "", self.items)

    def children(self):
        return self.items


class Proj(Term):
    __slots__ = ("index", "source")
    tag = 6

    def __init__(self, index: int, source: Term):
        self.index = index
        self.source = source
        self._seal("", str(index), (source,))

    def children(self):
        return (self.source,)


G = Const("G")
TRUE = Const("true")


def _bounded(t: Term) -> Term:
    if t.depth > MAX_DEPTH:
        raise TermDepthError(t)
    return t


# -- smart constructors ------------------------------------------------------

def exp(base: Term, *exponents: Term) -> Term:
    if not exponents:
        return base
    if isinstance(base, Exp):
        return _bounded(Exp(base.base, sorted(base.exps + exponents)))
    return _bounded(Exp(base, sorted(exponents)))


def is_public_key_of(pub: Term, sk: Term) -> bool:
    if isinstance(pub, Prim) and pub.name == "PK":
        return pub.args[0] == sk
    return isinstance(pub, Exp) and pub.base == G and pub.exps == (sk,)


def rewrites(name: str, args: tuple[Term, ...]) -> bool:
    """True if a destructor rule fires on ``name(args)`` (args already canonical)."""
    if name == "DEC" and len(args) == 2:
        k, c = args
        return isinstance(c, Prim) and c.name == "ENC" and c.args[0] == k
    if name == "AEAD_DEC" and len(args) == 3:
        k, c, ad = args
        return (isinstance(c, Prim) and c.name == "AEAD_ENC"
                and c.args[0] == k and c.args[2] == ad)
    if name == "SIGNVERIF" and len(args) == 3:
        pub, m, s = args
        return (isinstance(s, Prim) and s.name == "SIGN"
                and s.args[1] == m and is_public_key_of(pub, s.args[0]))
    return False


def prim(name: str, *args: Term) -> Term:
    if rewrites(name, args):
        if name == "SIGNVERIF":
            return TRUE
        return args[1].args[1]
    return _bounded(Prim(name, args))


def proj(index: int, source: Term) -> Term:
    if isinstance(source, Tup) and 0 <= index < len(source.items):
        return source.items[index]
    return _bounded(Proj(index, source))


def tup(*items: Term) -> Term:
    return _bounded(Tup(items))


def hkdf_outputs(args: Iterable[Term], n: int) -> list[Term]:
    """The ``n`` outputs of one HKDF application, as projections of it."""
    raw = prim("HKDF", *args)
    return [proj(i, raw) for i in range(n)]


def normalize(t: Term) -> Term:
    if t.depth > MAX_DEPTH:
        raise TermDepthError(t)
    if isinstance(t, Exp):
        return exp(normalize(t.base), *(normalize(e) for e in t.exps))
    if isinstance(t, Prim):
        return prim(t.name, *(normalize(a) for a in t.args))
    if isinstance(t, Tup):
        return tup(*(normalize(i) for i in t.items))
    if isinstance(t, Proj):
        return proj(t.index, normalize(t.source))
    return t


def equal(a: Term, b: Term) -> bool:
    return normalize(a) == normalize(b)


def iter_subterms(t: Term) -> Iterator[Term]:
    stack = [t]
    seen = set()
    while stack:
        cur = stack.pop()
        if cur in seen:
            continue
        seen.add(cur)
        yield cur
        stack.extend(cur.children())


def subterms(t: Term) -> set[Term]:
    return set(iter_subterms(normalize(t)))


def render(t: Term) -> str:
    if isinstance(t, (Const, Fresh, AttackerValue)):
        return t.name
    if isinstance(t, Exp):
        inner = ",".join(render(e) for e in t.exps)
        return f"{render(t.base)}^{{{inner}}}"
    if isinstance(t, Prim):
        return f"{t.name}({', '.join(render(a) for a in t.args)})"
    if isinstance(t, Tup):
        return f"({', '.join(render(i) for i in t.items)})"
    if isinstance(t, Proj):
        return f"{render(t.source)}[{t.index}]"
    raise TypeError(t)
