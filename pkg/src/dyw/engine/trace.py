"""Serialization of verdicts and attack traces."""

from __future__ import annotations

from ..term import render
from .explore import Event
from .queries import Verdict

TRACE_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["model", "query", "result", "events", "derivation"],
    "properties": {
        "model": {"type": "string"},
        "query": {"type": "string"},
        "result": {"enum": ["Proved", "Violated"]},
        "events": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["kind", "message_index", "slot", "term_rendered", "phase"],
                "properties": {
                    "kind": {"enum": ["observe", "mutate", "leak", "derive"]},
                    "message_index": {"type": ["integer", "null"], "minimum": 0},
                    "slot": {"type": ["string", "null"]},
                    "term_rendered": {"type": "string"},
                    "phase": {"type": "integer", "minimum": 0},
                },
                "additionalProperties": False,
            },
        },
        "derivation": {"anyOf": [{"type": "null"}, {"$ref": "#/$defs/node"}]},
    },
    "additionalProperties": False,
    "$defs": {
        "node": {
            "type": "object",
            "required": ["rule", "term", "premises"],
            "properties": {
                "rule": {"type": "string"},
                "term": {"type": "string"},
                "premises": {"type": "array", "items": {"$ref": "#/$defs/node"}},
            },
            "additionalProperties": False,
        }
    },
}


def event_json(e: Event) -> dict:
    return {
        "kind": e.kind,
        "message_index": e.message_index,
        "slot": e.slot,
        "term_rendered": render(e.term),
        "phase": e.phase,
    }


def verdict_json(v: Verdict, model: str = "") -> dict:
    t = v.trace
    return {
        "model": t.model if t else model,
        "query": str(v.query),
        "result": v.result,
        "events": [event_json(e) for e in t.events] if t else [],
        "derivation": t.derivation.to_json() if t and t.derivation else None,
    }


def describe(e: Event, rule: str | None = None) -> str:
    term = render(e.term)
    if e.kind == "observe":
        return f"[phase {e.phase}] observes {e.slot} = {term} in message {e.message_index}"
    if e.kind == "mutate":
        return (f"[phase {e.phase}] replaces {e.slot} with {term} "
                f"in message {e.message_index}")
    if e.kind == "leak":
        return f"[phase {e.phase}] {e.principal} leaks {e.slot}"
    how = f" by {rule}" if rule else ""
    return f"[phase {e.phase}] attacker derives {term}{how}"


def verdict_text(v: Verdict, with_trace: bool = True) -> str:
    head = f"{v.result.upper()} {v.query}"
    if not (with_trace and v.trace):
        return head
    lines = [head]
    rule = v.trace.derivation.rule if v.trace.derivation else None
    lines.extend("    " + describe(e, rule) for e in v.trace.events if e.kind != "observe")
    return "\n".join(lines)
