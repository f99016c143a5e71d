"""Hypothesis strategies: raw (unnormalized) terms and random protocol models."""

from __future__ import annotations

from hypothesis import strategies as st

from dyw.term import ARITY, AttackerValue, Const, Exp, Fresh, G, Prim, Proj, Tup

atoms = st.one_of(
    st.sampled_from([G, Const("c0"), Const("c1")]),
    st.builds(Fresh, st.sampled_from(["Alice", "Bob", ""]), st.sampled_from(["a", "b", "k", "m"])),
    st.sampled_from([AttackerValue("mal"), AttackerValue("nonce")]),
)

_FREE = ["HASH", "HKDF", "MAC", "HMAC", "PK", "RATCHET", "ENC", "AEAD_ENC", "SIGN",
         "DEC", "AEAD_DEC", "SIGNVERIF"]


def _extend(children):
    def prim(draw_name, args):
        n = ARITY.get(draw_name)
        args = args[:n] if n else args
        while n and len(args) < n:
            args = args + [G]
        return Prim(draw_name, args)

    return st.one_of(
        st.builds(prim, st.sampled_from(_FREE), st.lists(children, min_size=1, max_size=3)),
        st.builds(lambda b, es: Exp(b, es), children, st.lists(children, min_size=1, max_size=3)),
        st.builds(Tup, st.lists(children, min_size=1, max_size=3)),
        st.builds(Proj, st.integers(0, 2), children),
        # shapes that make rewrite rules fire
        st.builds(lambda k, m: Prim("DEC", [k, Prim("ENC", [k, m])]), children, children),
        st.builds(lambda k, m, a: Prim("AEAD_DEC", [k, Prim("AEAD_ENC", [k, m, a]), a]),
                  children, children, children),
        st.builds(lambda sk, m: Prim("SIGNVERIF", [Exp(G, [sk]), m, Prim("SIGN", [sk, m])]),
                  children, children),
    )


raw_terms = st.recursive(atoms, _extend, max_leaves=12)


# -- random models -----------------------------------------------------------

@st.composite
def models(draw, max_actions: int = 7) -> str:
    """Source text of a small well-formed model."""
    principals = ["Alice", "Bob"] + (["Carol"] if draw(st.booleans()) else [])
    known: dict[str, list[str]] = {p: [] for p in principals}
    shape: dict[str, tuple] = {}
    sends: list[tuple[str, str, str]] = []
    defined: list[str] = []
    items: list[str] = []
    phase = 0
    counter = [0]

    def fresh_name() -> str:
        counter[0] += 1
        return f"v{counter[0]}"

    def block(p: str, lines: list[str]) -> None:
        items.append(f"principal {p}[\n" + "".join(f"    {ln}\n" for ln in lines) + "]")

    def pick(p: str) -> str:
        return draw(st.sampled_from(known[p]))

    def compute(p: str) -> list[str]:
        ks = known[p]
        ops = ["HASH", "ENC", "AEAD_ENC", "SIGN", "PUB", "POW", "HKDF", "DEC", "AEAD_DEC", "SIGNVERIF"]
        op = draw(st.sampled_from(ops))
        target = fresh_name()
        if op == "PUB":
            a = pick(p)
            shape[target] = ("PUB", a)
            text = f"{target} = G^{a}"
        elif op == "POW":
            text = f"{target} = {pick(p)}^{pick(p)}"
        elif op == "HASH":
            text = f"{target} = HASH({', '.join(draw(st.lists(st.sampled_from(ks), min_size=1, max_size=3)))})"
        elif op == "ENC":
            k, m = pick(p), pick(p)
            shape[target] = ("ENC", k, m)
            text = f"{target} = ENC({k}, {m})"
        elif op == "AEAD_ENC":
            k, m, a = pick(p), pick(p), pick(p)
            shape[target] = ("AEAD_ENC", k, m, a)
            text = f"{target} = AEAD_ENC({k}, {m}, {a})"
        elif op == "SIGN":
            k, m = pick(p), pick(p)
            shape[target] = ("SIGN", k, m)
            text = f"{target} = SIGN({k}, {m})"
        elif op == "HKDF":
            second = fresh_name()
            text = f"{target}, {second} = HKDF({pick(p)})"
            known[p].append(target)
            defined.append(target)
            target = second
        else:
            # prefer arguments that make the check succeed on the honest run
            matching = [c for c in ks if shape.get(c, ("",))[0] == {
                "DEC": "ENC", "AEAD_DEC": "AEAD_ENC", "SIGNVERIF": "SIGN"}[op]]
            if matching and draw(st.booleans()):
                c = draw(st.sampled_from(matching))
                s = shape[c]
                if op == "DEC" and s[1] in ks:
                    text = f"{target} = DEC({s[1]}, {c})"
                elif op == "AEAD_DEC" and s[1] in ks and s[3] in ks:
                    text = f"{target} = AEAD_DEC({s[1]}, {c}, {s[3]})"
                elif op == "SIGNVERIF" and s[2] in ks:
                    pubs = [n for n in ks if shape.get(n) == ("PUB", s[1])]
                    pk = draw(st.sampled_from(pubs)) if pubs else pick(p)
                    text = f"{target} = SIGNVERIF({pk}, {s[2]}, {c})"
                else:
                    text = f"{target} = HASH({c})"
            elif op == "DEC":
                text = f"{target} = DEC({pick(p)}, {pick(p)})"
            elif op == "AEAD_DEC":
                text = f"{target} = AEAD_DEC({pick(p)}, {pick(p)}, {pick(p)})"
            else:
                text = f"{target} = SIGNVERIF({pick(p)}, {pick(p)}, {pick(p)})"
        known[p].append(target)
        defined.append(target)
        return [text]

    for p in principals[:2]:
        names = [fresh_name() for _ in range(draw(st.integers(1, 2)))]
        block(p, [f"generates {', '.join(names)}"])
        known[p].extend(names)
        defined.extend(names)

    for _ in range(draw(st.integers(2, max_actions))):
        action = draw(st.sampled_from(["gen", "compute", "compute", "send", "send", "leak", "phase"]))
        p = draw(st.sampled_from(principals))
        if action == "gen" or (not known[p] and action != "phase"):
            n = fresh_name()
            block(p, [f"generates {n}"])
            known[p].append(n)
            defined.append(n)
        elif action == "compute":
            block(p, compute(p))
        elif action == "send":
            q = draw(st.sampled_from([x for x in principals if x != p]))
            avail = [n for n in known[p] if n not in known[q]]
            if not avail:
                continue
            names = draw(st.lists(st.sampled_from(avail), min_size=1, max_size=3, unique=True))
            slots = [f"[{n}]" if draw(st.integers(0, 3)) == 0 else n for n in names]
            items.append(f"{p} -> {q}: {', '.join(slots)}")
            known[q].extend(names)
            sends.extend((p, q, n) for n in names)
        elif action == "leak":
            block(p, [f"leaks {pick(p)}"])
        else:
            phase += 1
            items.append(f"phase[{phase}]")

    queries = [f"confidentiality? {n}" for n in draw(
        st.lists(st.sampled_from(defined), min_size=1, max_size=2, unique=True))]
    if sends:
        p, q, n = draw(st.sampled_from(sends))
        queries.append(f"authentication? {p} -> {q}: {n}")
    mode = draw(st.sampled_from(["active", "passive"]))
    body = "\n\n".join(items)
    qs = "".join(f"    {q}\n" for q in queries)
    return f"attacker[{mode}]\n\n{body}\n\nqueries[\n{qs}]\n"
