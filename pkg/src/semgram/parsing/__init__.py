"""Top-down parsing: match kernel selection, Algorithm, statistics."""

from .match import DEFAULT_LIMITS, KERNEL_NAME, MatchLimits, SentenceIndex, match
from .parser import (
    DEFAULT_PARAMS, FULLY_PARSED, NULL, PARTIALLY_PARSED, ParseOutcome,
    ParseStats, ReliabilityParams, SemanticNode, SemanticTree,
    combine_reliability, corpus_stats, coverage, parse, parse_corpus,
    parse_term, reliability, stats_from_outcomes, tree_depth,
)

__all__ = [name for name in dir() if not name.startswith("_")]
