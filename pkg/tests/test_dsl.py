import pytest
from hypothesis import HealthCheck, given, settings

from dyw.dsl import (
    CompileError, ParseError, compile_model, format_model, parse, validate,
)
from dyw.dsl.ast import Authentication, Confidentiality, PhaseMarker
from dyw.dsl.compile import Compute, Generate, PhaseAdvance, Receive, Send
from dyw.models import entry

from fuzzing import fuzz_parse
from strategies import models

THREEDH = entry("threedh_example").source()


def _messages(diags):
    return [d.message for d in diags]


def test_threedh_structure():
    ast = parse(THREEDH)
    assert ast.attacker == "active"
    assert ast.principals == ["Alice", "Bob"]
    blocks = [i.name for i in ast.items if hasattr(i, "statements")]
    assert blocks.count("Alice") == 2 and blocks.count("Bob") == 1
    first, second = ast.messages
    assert [(s.name, s.guarded) for s in first.slots] == [
        ("alice_public", True), ("alice_prekey_public", False)]
    assert [s.name for s in second.slots] == ["bob_public", "bob_prekey_public", "e"]
    assert len(ast.queries) == 2
    assert isinstance(ast.queries[0], Confidentiality)
    assert isinstance(ast.queries[1], Authentication)
    assert str(ast.queries[1]) == "authentication? Bob -> Alice: e"


def test_minimal_document():
    ast = parse("attacker[passive]")
    assert ast.attacker == "passive" and ast.principals == [] and ast.queries == ()


def test_unclosed_block_reported_at_end():
    src = THREEDH.rstrip()
    assert src.endswith("]")
    with pytest.raises(ParseError) as err:
        parse(src[:-1])
    (diag,) = err.value.diagnostics
    assert "unclosed" in diag.message
    assert diag.line == src.count("\n") + 1


def test_syntax_error_location():
    with pytest.raises(ParseError) as err:
        parse("attacker[active]\nprincipal A[\n  x = = y\n]\n")
    d = err.value.diagnostics[0]
    assert (d.line, d.col) == (3, 7)


def test_unknown_primitive_rejected():
    with pytest.raises(ParseError):
        parse("attacker[active]\nprincipal A[\n generates x\n y = FOO(x)\n]")


def test_comments_and_checked_marker():
    ast = parse("// header\nattacker[active] // trailing\nprincipal A[\n generates x\n y = HASH(x)?\n]")
    assert ast.principals == ["A"]


def test_invalid_utf8_is_a_diagnostic():
    with pytest.raises(ParseError) as err:
        parse(b"attacker[active]\n\xff")
    assert err.value.diagnostics[0].line == 2


def test_roundtrip_threedh():
    ast = parse(THREEDH)
    assert parse(format_model(ast)) == ast


@settings(max_examples=150, deadline=None, suppress_health_check=list(HealthCheck))
@given(models())
def test_roundtrip_generated(src):
    ast = parse(src)
    assert parse(format_model(ast)) == ast


# -- validation ----------------------------------------------------------------

def test_threedh_validates_clean():
    assert validate(parse(THREEDH)) == []


def test_use_before_definition():
    src = THREEDH.replace("Alice -> Bob:", "principal Alice[\n    z = HASH(bob_public)\n]\n\nAlice -> Bob:", 1)
    msgs = _messages(validate(parse(src)))
    assert any(msg.startswith("use before definition: 'bob_public'") for msg in msgs)


def test_unknown_query_identifier():
    src = THREEDH.replace("confidentiality? mb", "confidentiality? zz")
    assert "unknown identifier in query: 'zz'" in _messages(validate(parse(src)))


def test_duplicate_generate():
    src = "attacker[active]\nprincipal A[\n generates x\n]\nprincipal B[\n generates x\n]"
    assert any("duplicate definition of 'x'" in msg for msg in _messages(validate(parse(src))))


def test_phase_must_increase():
    src = "attacker[active]\nphase[2]\nphase[1]\n"
    assert any("does not increase" in msg for msg in _messages(validate(parse(src))))


def test_self_send_rejected():
    src = "attacker[active]\nprincipal A[\n generates x\n]\nA -> A: x\n"
    assert validate(parse(src))


def test_authentication_needs_carrying_message():
    src = THREEDH.replace("authentication? Bob -> Alice: e", "authentication? Alice -> Bob: e")
    assert any("no message from Alice to Bob" in msg for msg in _messages(validate(parse(src))))


# -- compilation -----------------------------------------------------------------

def test_threedh_plan_shape():
    plan = compile_model(parse(THREEDH))
    kinds = [type(s).__name__ for s in plan.steps]
    assert kinds[:4] == ["Generate", "Generate", "Compute", "Compute"]
    assert kinds[4:6] == ["Send", "Receive"]
    first_send = 4
    second_send = kinds.index("Send", first_send + 1)
    bob = plan.steps[first_send + 2:second_send]
    assert sum(isinstance(s, Compute) for s in bob) == 7
    assert all(s.principal == "Bob" for s in bob)
    alice = plan.steps[second_send + 2:]
    assert len(alice) == 5 and all(isinstance(s, Compute) and s.principal == "Alice" for s in alice)
    assert isinstance(plan.steps[second_send + 1], Receive)


def test_phase_advance_positioned():
    src = ("attacker[active]\nprincipal A[\n generates x\n]\nA -> B: x\nphase[1]\n"
           "principal A[\n leaks x\n]\nqueries[\n confidentiality? x\n]")
    ast = parse(src)
    assert any(isinstance(i, PhaseMarker) for i in ast.items)
    steps = compile_model(ast).steps
    at = next(i for i, s in enumerate(steps) if isinstance(s, PhaseAdvance))
    assert isinstance(steps[at - 1], Receive) and steps[at].phase == 1
    assert type(steps[at + 1]).__name__ == "Leak"
    assert isinstance(steps[0], Generate) and isinstance(steps[1], Send)


def test_hash_with_two_targets_is_arity_error():
    src = "attacker[active]\nprincipal A[\n generates x\n a, b = HASH(x)\n]"
    assert any("arity mismatch: HASH yields one output" in msg for msg in _messages(validate(parse(src))))
    with pytest.raises(CompileError):
        compile_model(parse(src))


def test_fixed_arity_primitive():
    src = "attacker[active]\nprincipal A[\n generates x\n a = ENC(x)\n]"
    assert any("ENC expects 2 arguments" in msg for msg in _messages(validate(parse(src))))


def test_multi_output_hkdf_compiles_to_projections():
    src = "attacker[active]\nprincipal A[\n generates x\n a, b, c = HKDF(x)\n]"
    step = compile_model(parse(src)).steps[1]
    assert [type(e).__name__ for e in step.output_exprs()] == ["Output"] * 3


# -- robustness ---------------------------------------------------------------------

def test_fuzz_parse_never_crashes():
    assert fuzz_parse(THREEDH, 100_000, seed=20261016) >= 100_000
