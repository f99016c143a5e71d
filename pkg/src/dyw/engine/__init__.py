from .explore import (
    Event, Execution, Explorer, Mutation, ReplayError, StrategySpaceError,
    explore, replay,
)
from .knowledge import Deducer, Derivation, InconclusiveError, KnowledgeBase, derivable
from .queries import (
    PROVED, VIOLATED, AnalysisError, Trace, Verdict, analyze, check_queries,
    check_query, prepare, violation,
)
from .trace import TRACE_SCHEMA, verdict_json, verdict_text

__all__ = [
    "AnalysisError", "Deducer", "Derivation", "Event", "Execution", "Explorer",
    "InconclusiveError", "KnowledgeBase", "Mutation", "PROVED", "ReplayError",
    "StrategySpaceError", "TRACE_SCHEMA", "Trace", "VIOLATED", "Verdict",
    "analyze", "check_queries", "check_query", "derivable", "explore", "prepare",
    "replay", "verdict_json", "verdict_text", "violation",
]
