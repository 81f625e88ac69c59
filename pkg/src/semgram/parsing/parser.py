"""Top-down recursive-descent parser with backtracking over layered sentences.

The recursive Parse(term, non-terminal) tries every eligible rule; each
ambiguous pattern match spawns a candidate node, and the most reliable
candidate wins. When nothing matches, a null node is created. Every node
that is not fully parsed -- the selected ones and the null/partial results
living inside discarded candidates -- is collected for grammar induction.

Reliability of a node n:

    1                                       when fully parsed
    0                                       when null
    b*(1 - tp(n)) + (1-b) * sum(|c|*r(c)) / sum(|c|)   otherwise

with tp(n) the trigger probability of the rule that parsed n, b a small
weight (default 0.05), and |c| the word length of child c. Longer parsed
children raise reliability; loosely-defined rules (high tp) lower it.

Memoization on (span, class) keys reduces the exponential backtracking to
polynomial time; the cache lives for a single sentence only, so grammar
snapshots can change between sentences but never during one.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

from ..corpus import LayeredSentence, Term
from ..grammar import GrammarSnapshot, Rule
from .match import DEFAULT_LIMITS, MatchLimits, SentenceIndex, match

FULLY_PARSED = "fully-parsed"
PARTIALLY_PARSED = "partially-parsed"
NULL = "null"


@dataclass(frozen=True)
class SemanticNode:
    """One parse node: a semantic class over a term, with the rule used."""

    class_name: str
    rule_id: Optional[int]       # None marks a null node
    term: Term
    children: tuple["SemanticNode", ...] = ()
    status: str = NULL
    reliability: float = 0.0

    @property
    def is_null(self) -> bool:
        return self.rule_id is None

    def walk(self):
        yield self
        for child in self.children:
            yield from child.walk()

    def leaves(self):
        if not self.children:
            yield self
        else:
            for child in self.children:
                yield from child.leaves()


@dataclass(frozen=True)
class SemanticTree:
    root: SemanticNode
    sentence_id: str
    grammar_version: int
    operations: int = 0

    @property
    def fully_parsed(self) -> bool:
        return self.root.status == FULLY_PARSED


@dataclass(frozen=True)
class ReliabilityParams:
    beta: float = 0.05
    limits: MatchLimits = DEFAULT_LIMITS
    operation_cap: int = 1_000_000


DEFAULT_PARAMS = ReliabilityParams()


def combine_reliability(tp: float, beta: float,
                        child_lengths: Sequence[int],
                        child_scores: Sequence[float]) -> float:
    """The partially-parsed branch of the reliability formula."""
    if not child_lengths:
        raise ValueError("partially parsed node with zero children")
    total = sum(child_lengths)
    weighted = sum(l * r for l, r in zip(child_lengths, child_scores))
    return beta * (1.0 - tp) + (1.0 - beta) * weighted / total


def reliability(node: SemanticNode, params: ReliabilityParams,
                grammar: GrammarSnapshot) -> float:
    """Recompute a node's reliability from scratch (nodes cache it too)."""
    if node.status == FULLY_PARSED:
        return 1.0
    if node.status == NULL:
        return 0.0
    if not node.children:
        raise ValueError("partially parsed node with zero children")
    return combine_reliability(
        grammar.trigger_probability(node.rule_id), params.beta,
        [len(c.term) for c in node.children],
        [reliability(c, params, grammar) for c in node.children])


class _BudgetExceeded(Exception):
    pass


def _candidate_order_key(node: SemanticNode) -> tuple:
    """Deterministic tie-break among equally reliable candidates:
    lower rule id first, then leftmost-longest child terms."""
    child_key = tuple((c.term.start, -len(c.term)) for c in node.children)
    return (node.rule_id, child_key)


class _ParseRun:
    """State for parsing one sentence against one grammar snapshot."""

    def __init__(self, sentence: LayeredSentence, grammar: GrammarSnapshot,
                 params: ReliabilityParams):
        self.sentence = sentence
        self.grammar = grammar
        self.params = params
        self.index = SentenceIndex(sentence)
        self.memo: dict[tuple, SemanticNode] = {}
        self.in_progress: set[tuple] = set()
        self.induction_nodes: list[SemanticNode] = []
        self.operations = 0

    def parse(self, term: Term, class_name: str) -> SemanticNode:
        self.operations += 1
        if self.operations > self.params.operation_cap:
            raise _BudgetExceeded
        key = (term.start, term.end, class_name)
        hit = self.memo.get(key)
        if hit is not None:
            return hit
        if key in self.in_progress:
            # Unary rule cycle (e.g. <X> ::= <Y>, <Y> ::= <X>): cut the
            # derivation here. The outer in-flight call produces the real
            # node for this key, so this stand-in is neither memoized nor
            # collected for induction.
            return SemanticNode(class_name, None, term)
        self.in_progress.add(key)
        try:
            node = self._expand(term, class_name)
        finally:
            self.in_progress.discard(key)
        self.memo[key] = node
        if node.status != FULLY_PARSED:
            self.induction_nodes.append(node)
        return node

    def _expand(self, term: Term, class_name: str) -> SemanticNode:
        best: Optional[SemanticNode] = None
        best_key: Optional[tuple] = None
        for rule in self.grammar.parsing_rules_for(class_name):
            slots = rule.nonterminal_slots()
            for term_list in match(rule.rhs, term, self.sentence,
                                   self.params.limits, self.index):
                children = tuple(
                    self.parse(child_term, rule.rhs[slot].name)
                    for slot, child_term in zip(slots, term_list))
                node = self._make_node(class_name, rule, term, children)
                key = _candidate_order_key(node)
                if (best is None or node.reliability > best.reliability
                        or (node.reliability == best.reliability
                            and key < best_key)):
                    best, best_key = node, key
        if best is None:
            return SemanticNode(class_name, None, term)
        return best

    def _make_node(self, class_name: str, rule: Rule, term: Term,
                   children: tuple[SemanticNode, ...]) -> SemanticNode:
        if all(c.status == FULLY_PARSED for c in children):
            return SemanticNode(class_name, rule.id, term, children,
                                FULLY_PARSED, 1.0)
        score = combine_reliability(
            self.grammar.trigger_probability(rule.id), self.params.beta,
            [len(c.term) for c in children],
            [c.reliability for c in children])
        return SemanticNode(class_name, rule.id, term, children,
                            PARTIALLY_PARSED, score)


def parse(sentence: LayeredSentence, start: str, grammar: GrammarSnapshot,
          params: ReliabilityParams = DEFAULT_PARAMS,
          ) -> tuple[SemanticTree, list[SemanticNode]]:
    """Parse one sentence from the start non-terminal.

    Returns the best tree plus the induction-node list: one entry per
    distinct (span, class) whose parse result is not fully parsed, in
    discovery order. A sentence nothing matches yields a null root whose
    induction list is just that root. Deterministic for a fixed
    (sentence, snapshot, params).
    """
    run = _ParseRun(sentence, grammar, params)
    term = sentence.whole_term()
    try:
        root = run.parse(term, start)
        nodes = run.induction_nodes
    except _BudgetExceeded:
        root = SemanticNode(start, None, term)
        nodes = [root]
    return SemanticTree(root, sentence.id, grammar.version, run.operations), nodes


def parse_term(sentence: LayeredSentence, term: Term, class_name: str,
               grammar: GrammarSnapshot,
               params: ReliabilityParams = DEFAULT_PARAMS) -> SemanticNode:
    """Run the Parse function on a single (term, non-terminal) pair."""
    run = _ParseRun(sentence, grammar, params)
    try:
        return run.parse(term, class_name)
    except _BudgetExceeded:
        return SemanticNode(class_name, None, term)


# ---------------------------------------------------------------------------
# Corpus-level parsing and statistics


@dataclass(frozen=True)
class ParseOutcome:
    tree: SemanticTree
    induction_nodes: tuple[SemanticNode, ...]
    seconds: float


_WORKER_STATE: dict = {}


def _worker_init(grammar, start, params):
    _WORKER_STATE["args"] = (grammar, start, params)


def _worker_parse(sentence):
    grammar, start, params = _WORKER_STATE["args"]
    t0 = time.perf_counter()
    tree, nodes = parse(sentence, start, grammar, params)
    return ParseOutcome(tree, tuple(nodes), time.perf_counter() - t0)


def parse_corpus(sentences: Sequence[LayeredSentence], start: str,
                 grammar: GrammarSnapshot,
                 params: ReliabilityParams = DEFAULT_PARAMS,
                 workers: int = 1) -> list[ParseOutcome]:
    """Parse a corpus, optionally with a process pool.

    Sentences are independent and the grammar snapshot is immutable, so the
    outcome list is identical for any worker count (timings aside); results
    are always returned in corpus order.
    """
    if workers <= 1 or len(sentences) <= 1:
        out = []
        for sent in sentences:
            t0 = time.perf_counter()
            tree, nodes = parse(sent, start, grammar, params)
            out.append(ParseOutcome(tree, tuple(nodes),
                                    time.perf_counter() - t0))
        return out
    from concurrent.futures import ProcessPoolExecutor
    with ProcessPoolExecutor(max_workers=workers, initializer=_worker_init,
                             initargs=(grammar, start, params)) as pool:
        return list(pool.map(_worker_parse, sentences, chunksize=8))


@dataclass(frozen=True)
class ParseStats:
    """Corpus-level parse statistics (the test-set summary table)."""

    sentences: int
    fully_parsed_fraction: float
    avg_coverage: float
    avg_tree_depth: float
    avg_leaf_count: float
    avg_null_leaf_count: float
    avg_operations: float
    avg_parse_seconds: float

    def table(self) -> str:
        rows = [
            ("fully parsed sentences", f"{self.fully_parsed_fraction:.2%}"),
            ("avg. coverage", f"{self.avg_coverage:.2%}"),
            ("avg. tree depth", f"{self.avg_tree_depth:.2f}"),
            ("avg. number of leaf nodes", f"{self.avg_leaf_count:.2f}"),
            ("avg. number of null leaf nodes", f"{self.avg_null_leaf_count:.2f}"),
            ("avg. number of operations", f"{self.avg_operations:.1f}"),
            ("avg parsing time", f"{self.avg_parse_seconds * 1000:.2f} ms"),
        ]
        width = max(len(name) for name, _ in rows)
        return "\n".join(f"{name:<{width}}  {value}" for name, value in rows)


def coverage(tree: SemanticTree) -> float:
    """Fraction of the sentence's words inside parsed (non-null) leaves."""
    total = len(tree.root.term)
    nulls = sum(len(leaf.term) for leaf in tree.root.leaves() if leaf.is_null)
    return (total - nulls) / total


def tree_depth(node: SemanticNode) -> int:
    """Depth in nodes: a leaf (or null root) counts 1."""
    if not node.children:
        return 1
    return 1 + max(tree_depth(c) for c in node.children)


def corpus_stats(trees: Sequence[SemanticTree],
                 timings: Optional[Sequence[float]] = None) -> ParseStats:
    if not trees:
        raise ValueError("corpus_stats needs at least one tree")
    n = len(trees)
    leaves = [list(t.root.leaves()) for t in trees]
    return ParseStats(
        sentences=n,
        fully_parsed_fraction=sum(t.fully_parsed for t in trees) / n,
        avg_coverage=sum(coverage(t) for t in trees) / n,
        avg_tree_depth=sum(tree_depth(t.root) for t in trees) / n,
        avg_leaf_count=sum(len(ls) for ls in leaves) / n,
        avg_null_leaf_count=sum(
            sum(1 for l in ls if l.is_null) for ls in leaves) / n,
        avg_operations=sum(t.operations for t in trees) / n,
        avg_parse_seconds=(sum(timings) / len(timings)) if timings else 0.0,
    )


def stats_from_outcomes(outcomes: Iterable[ParseOutcome]) -> ParseStats:
    outcomes = list(outcomes)
    return corpus_stats([o.tree for o in outcomes],
                        [o.seconds for o in outcomes])
