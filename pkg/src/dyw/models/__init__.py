"""Built-in protocol models and their expected verdicts."""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path


@dataclass(frozen=True)
class CorpusEntry:
    path: str
    section: str
    description: str
    attacker: str
    queries: tuple[tuple[str, str], ...]  # (query text, "Proved" | "Violated")

    @property
    def name(self) -> str:
        return Path(self.path).stem

    def source(self) -> str:
        return (data_dir() / self.path).read_text(encoding="utf-8")


class FixtureMissing(LookupError):
    pass


def data_dir() -> Path:
    return Path(str(resources.files(__package__) / "data"))


def manifest_path() -> Path:
    return data_dir() / "corpus.json"


def load_manifest(path) -> list[CorpusEntry]:
    raw = json.loads(Path(path).read_text(encoding="utf-8"))
    return [
        CorpusEntry(
            item["path"], item.get("section", ""), item.get("description", ""),
            item.get("attacker", "active"),
            tuple((q["query"], q["expected"]) for q in item["queries"]),
        )
        for item in raw
    ]


def corpus() -> list[CorpusEntry]:
    return load_manifest(manifest_path())


def entry(name: str) -> CorpusEntry:
    for e in corpus():
        if e.name == name or e.path == name:
            return e
    raise KeyError(name)


def expected_trace(entry_or_name, query: str) -> dict:
    """Stored reference trace: ``{"events": [{kind, slot}, ...], ...}``."""
    name = entry_or_name.name if isinstance(entry_or_name, CorpusEntry) else entry_or_name
    path = Path(str(resources.files(__package__) / "traces")) / f"{name}.json"
    try:
        fixtures = json.loads(path.read_text(encoding="utf-8"))
        return fixtures[query]
    except (FileNotFoundError, KeyError):
        raise FixtureMissing(f"no trace fixture for {name!r} / {query!r}") from None


def is_subsequence(needle: list[dict], events: list[dict]) -> bool:
    """True if ``needle`` (kind/slot pairs) appears in order within ``events``."""
    it = iter(events)
    return all(any(e["kind"] == n["kind"] and e["slot"] == n["slot"] for e in it) for n in needle)
