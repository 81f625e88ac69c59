"""Iterative grammar bootstrapping: generalize null nodes, promote the most
frequent candidate rule, take a property decision, re-estimate trigger
probability, repeat.

Null-node terms are generalized in two steps. Layer generalization rewrites
the term into mixed-layer terminals following a priority order: all non-null
tokens of the first layer are taken, uncovered positions fall through to the
next layer, and the final (total) layer picks up the rest. Bottom-up
generalization then greedily replaces sub-sequences matching the rhs of
existing positive rules by their lhs, longer matches first, until a
fixpoint; right-hand sides are matched simultaneously with an Aho-Corasick
automaton.

Candidates are grouped by the resulting (lhs, rhs), counted, and ranked by
frequency. One candidate is pending per session at a time; a decision adds
it to the grammar with the chosen property.
"""

from __future__ import annotations

import csv
import json
import os
import random
import time
from dataclasses import dataclass, replace
from typing import Iterable, Mapping, Optional, Sequence

from .corpus import LayeredSentence, Term
from .grammar import (
    NEGATIVE, NEUTRAL, NON_INDUCIBLE, POSITIVE, Grammar, GrammarSnapshot,
    Rule, Symbol, load_grammar, parse_symbol, save_grammar,
)
from .ahocorasick import SymbolMatcher
from .parsing.match import MatchLimits, SentenceIndex, match
from .parsing.parser import (
    DEFAULT_PARAMS, ParseStats, ReliabilityParams, SemanticNode,
    parse_corpus, stats_from_outcomes,
)

_UNIV_KEY = "\x00*"  # wildcard slot in the Aho-Corasick alphabet


class InductionError(Exception):
    pass


class SessionStopped(InductionError):
    pass


@dataclass(frozen=True)
class LayerPriority:
    """Layer order for generalization; the final layer must be total."""

    layers: tuple[str, ...]

    def __post_init__(self):
        if not self.layers:
            raise ValueError("empty layer priority")

    def __iter__(self):
        return iter(self.layers)


def generalize_layers(term: Term, sentence: LayeredSentence,
                      priority: LayerPriority) -> tuple[Symbol, ...]:
    """Rewrite a term as mixed-layer terminals by priority order."""
    taken: list[tuple[int, Symbol]] = []
    covered = [False] * len(term)
    remaining = len(term)
    for layer in priority:
        if remaining == 0:
            break
        toks = sentence.layers.get(layer)
        if toks is None:
            continue
        for tok in toks:
            if tok.is_null or tok.start < term.start or tok.end > term.end:
                continue
            cells = range(tok.start - term.start, tok.end - term.start)
            if any(covered[i] for i in cells):
                continue  # partially claimed by an earlier layer: broken
            for i in cells:
                covered[i] = True
            remaining -= len(tok)
            taken.append((tok.start, Symbol.term(tok.value, layer)))
    if remaining:
        missing = [term.start + i for i, c in enumerate(covered) if not c]
        raise InductionError(
            f"positions {missing} of sentence {sentence.id!r} not covered; "
            f"the last priority layer must be total")
    taken.sort(key=lambda pair: pair[0])
    return tuple(sym for _, sym in taken)


def _symbol_key(sym: Symbol):
    return _UNIV_KEY if sym.is_universal else sym


def _alternatives(sym):
    if isinstance(sym, Symbol) and sym.is_nonterminal:
        return (_UNIV_KEY,)
    return ()


def _bind_universal(rule: Rule, window: Sequence[Symbol]) -> Optional[Symbol]:
    """Consistent non-terminal binding for a schema match, if any."""
    bind: Optional[Symbol] = None
    for pat, sym in zip(rule.rhs, window):
        if pat.is_universal:
            if not sym.is_nonterminal:
                return None
            if bind is None:
                bind = sym
            elif bind != sym:
                return None
    return bind


class BottomUpReducer:
    """Greedy fixpoint reducer over one grammar snapshot's induction rules."""

    def __init__(self, grammar: GrammarSnapshot):
        self._matcher = SymbolMatcher()
        self._rules = grammar.induction_rules
        for rule in self._rules:
            self._matcher.add([_symbol_key(s) for s in rule.rhs], rule)
        self._matcher.build()

    def _pass_matches(self, symbols: Sequence[Symbol]):
        matches = []
        for start, end, rule in self._matcher.scan(symbols, _alternatives):
            if rule.is_schema:
                bind = _bind_universal(rule, symbols[start:end])
                if bind is None:
                    continue
                lhs = bind if rule.lhs.is_universal else rule.lhs
            else:
                lhs = rule.lhs
            matches.append((start, end, rule, lhs))
        # longer matches first; ties leftmost, then lowest rule id
        matches.sort(key=lambda m: (-(m[1] - m[0]), m[0], m[2].id))
        return matches

    def reduce(self, symbols: Sequence[Symbol]) -> tuple[Symbol, ...]:
        """Replace disjoint rhs matches by their lhs until nothing matches.

        Greedy per pass: overlapping matches are discarded, longer ones win.
        A seen-sequence guard makes unary replacement cycles terminate.
        """
        current = tuple(symbols)
        if not self._rules:
            return current
        seen = {current}
        while True:
            accepted: list[tuple[int, int, Symbol]] = []
            used = [False] * len(current)
            for start, end, _rule, lhs in self._pass_matches(current):
                if any(used[start:end]):
                    continue
                for i in range(start, end):
                    used[i] = True
                accepted.append((start, end, lhs))
            if not accepted:
                return current
            accepted.sort()
            out: list[Symbol] = []
            pos = 0
            for start, end, lhs in accepted:
                out.extend(current[pos:start])
                out.append(lhs)
                pos = end
            out.extend(current[pos:])
            current = tuple(out)
            if current in seen:
                return current
            seen.add(current)


def generalize_bottom_up(symbols: Sequence[Symbol],
                         grammar: GrammarSnapshot) -> tuple[Symbol, ...]:
    if not symbols:
        raise InductionError("cannot generalize an empty symbol sequence")
    return BottomUpReducer(grammar).reduce(symbols)


# ---------------------------------------------------------------------------
# Candidate construction


@dataclass(frozen=True)
class SampleRef:
    sentence_id: str
    start: int
    end: int


@dataclass(frozen=True)
class CandidateRule:
    lhs: str
    rhs: tuple[Symbol, ...]
    frequency: int
    samples: tuple[SampleRef, ...]  # up to 10, from distinct sentences if possible

    def display(self) -> str:
        return f"<{self.lhs}> ::= {' '.join(s.display() for s in self.rhs)}"


MAX_SAMPLES = 10


def propose_rules(nodes: Iterable[SemanticNode],
                  sentences: Mapping[str, LayeredSentence],
                  grammar: GrammarSnapshot,
                  priority: LayerPriority,
                  reducer: Optional[BottomUpReducer] = None,
                  ) -> list[CandidateRule]:
    """Generalize every null node and rank the resulting rules by frequency.

    Pairs already in the grammar (in particular neutral-blacklisted ones)
    and degenerate <C> ::= <C> reductions are dropped. Output order is
    deterministic and invariant under permutation of the input nodes:
    frequency desc, then longer rhs, then rhs/lhs display.
    """
    existing = {(r.lhs, r.rhs) for r in grammar.rules.values()}
    groups: dict[tuple, list[SemanticNode]] = {}
    for node in nodes:
        if not node.is_null:
            continue
        sent = sentences[node.term.sentence_id]
        rhs = generalize_layers(node.term, sent, priority)
        if reducer is not None:
            rhs = reducer.reduce(rhs)
        else:
            rhs = generalize_bottom_up(rhs, grammar)
        if rhs == (Symbol.nt(node.class_name),):
            continue  # would be the cyclical rule <C> ::= <C>
        if (Symbol.nt(node.class_name), rhs) in existing:
            continue
        groups.setdefault((node.class_name, rhs), []).append(node)
    candidates = []
    for (lhs, rhs), members in groups.items():
        members.sort(key=lambda n: (n.term.sentence_id, n.term.start, n.term.end))
        picked: list[SemanticNode] = []
        used_sents: set[str] = set()
        for node in members:
            if node.term.sentence_id not in used_sents:
                picked.append(node)
                used_sents.add(node.term.sentence_id)
            if len(picked) == MAX_SAMPLES:
                break
        for node in members:
            if len(picked) == MAX_SAMPLES:
                break
            if node not in picked:
                picked.append(node)
        samples = tuple(
            SampleRef(n.term.sentence_id, n.term.start, n.term.end)
            for n in picked)
        candidates.append(CandidateRule(lhs, rhs, len(members), samples))
    candidates.sort(key=lambda c: (
        -c.frequency, -len(c.rhs),
        " ".join(s.display() for s in c.rhs), c.lhs))
    return candidates


# ---------------------------------------------------------------------------
# Trigger probability


def iter_all_terms(sentences: Sequence[LayeredSentence]):
    for sent in sentences:
        n = sent.length
        for s in range(n):
            for e in range(s + 1, n + 1):
                yield sent, Term(sent.id, s, e)


def count_terms(sentences: Sequence[LayeredSentence]) -> int:
    return sum(s.length * (s.length + 1) // 2 for s in sentences)


def estimate_trigger_probability(rule: Rule,
                                 sentences: Sequence[LayeredSentence],
                                 sample_size: int = 10_000,
                                 seed: int = 0,
                                 limits: MatchLimits = MatchLimits(),
                                 ) -> float:
    """Fraction of random corpus terms the rule's rhs matches.

    Samples `sample_size` terms uniformly without replacement (all terms
    when the corpus has fewer), with a fixed seed for reproducibility.
    """
    if sample_size < 1:
        raise ValueError("sample size must be >= 1")
    if not sentences:
        raise InductionError("cannot estimate trigger probability on an empty corpus")
    total = count_terms(sentences)
    indexes: Optional[set[int]] = None
    if total > sample_size:
        rng = random.Random(seed)
        indexes = set(rng.sample(range(total), sample_size))
    hits = 0
    drawn = 0
    index_cache: dict[str, SentenceIndex] = {}
    for i, (sent, term) in enumerate(iter_all_terms(sentences)):
        if indexes is not None and i not in indexes:
            continue
        drawn += 1
        idx = index_cache.get(sent.id)
        if idx is None:
            idx = index_cache[sent.id] = SentenceIndex(sent)
        if match(rule.rhs, term, sent, limits, idx):
            hits += 1
    return hits / drawn


# ---------------------------------------------------------------------------
# The induction session


@dataclass(frozen=True)
class StopCriteria:
    max_iterations: Optional[int] = None
    wall_clock_seconds: Optional[float] = 7200.0


@dataclass
class HistoryRow:
    """Per-iteration series, recorded only for non-neutral decisions."""

    iteration: int
    rule: str
    property: str
    frequency: int
    coverage: float
    fully_parsed: float
    avg_operations: float
    avg_tree_depth: float
    avg_leaf_count: float
    avg_null_leaf_count: float

    FIELDS = ("iteration", "rule", "property", "frequency", "coverage",
              "fully_parsed", "avg_operations", "avg_tree_depth",
              "avg_leaf_count", "avg_null_leaf_count")

    def as_list(self) -> list:
        return [getattr(self, f) for f in self.FIELDS]


class InductionSession:
    """One bootstrapping run over a fixed corpus sample.

    `run_iteration` parses the sample, generalizes the collected nodes and
    exposes the top candidate; `apply_decision` commits it with a property.
    Exactly one candidate is pending at a time. All randomness is derived
    from the session seed, so a fixed decision sequence reproduces the run
    bit-for-bit, for any parser worker count.
    """

    def __init__(self, grammar: Grammar, sentences: Sequence[LayeredSentence],
                 priority: LayerPriority,
                 params: ReliabilityParams = DEFAULT_PARAMS,
                 stop: StopCriteria = StopCriteria(),
                 seed: int = 0, workers: int = 1,
                 tp_sample_size: int = 10_000):
        self.grammar = grammar
        self.sentences = list(sentences)
        self.by_id = {s.id: s for s in self.sentences}
        self.priority = priority
        self.params = params
        self.stop_criteria = stop
        self.seed = seed
        self.workers = workers
        self.tp_sample_size = tp_sample_size
        self.iteration = 0            # completed decisions
        self.pending: Optional[CandidateRule] = None
        self.last_stats: Optional[ParseStats] = None
        self.decision_log: list[tuple[int, str, str]] = []
        self.history: list[HistoryRow] = []
        self.stopped = False
        self._started = time.monotonic()
        self._elapsed_offset = 0.0

    # -- state inspection

    def elapsed_seconds(self) -> float:
        return self._elapsed_offset + (time.monotonic() - self._started)

    def should_stop(self) -> bool:
        crit = self.stop_criteria
        if crit.max_iterations is not None and self.iteration >= crit.max_iterations:
            return True
        if (crit.wall_clock_seconds is not None
                and self.elapsed_seconds() >= crit.wall_clock_seconds):
            return True
        return False

    def stop(self) -> None:
        self.stopped = True

    # -- the iteration pair

    def run_iteration(self) -> Optional[CandidateRule]:
        """Parse the sample and promote the most frequent candidate rule.

        Returns None (and stops the session) when no candidate emerges,
        i.e. the grammar already parses everything it can.
        """
        if self.stopped:
            raise SessionStopped("session is stopped")
        if self.pending is not None:
            raise InductionError("a candidate is already awaiting a decision")
        snapshot = self.grammar.snapshot()
        outcomes = parse_corpus(self.sentences, self.grammar.start_symbol,
                                snapshot, self.params, self.workers)
        self.last_stats = stats_from_outcomes(outcomes)
        nodes: list[SemanticNode] = []
        for outcome in outcomes:
            nodes.extend(outcome.induction_nodes)
        reducer = BottomUpReducer(snapshot)
        candidates = propose_rules(nodes, self.by_id, snapshot,
                                   self.priority, reducer)
        if not candidates:
            self.stop()
            return None
        self.pending = candidates[0]
        return self.pending

    def apply_decision(self, property: str) -> Grammar:
        """Commit the pending candidate with the given property."""
        if self.pending is None:
            raise InductionError("no candidate awaiting a decision")
        cand = self.pending
        iteration = self.iteration + 1
        rule_id = self.grammar.add_rule(
            Symbol.nt(cand.lhs), cand.rhs, property=property,
            origin=f"induced:{iteration}")
        if property in (POSITIVE, NON_INDUCIBLE):
            tp = estimate_trigger_probability(
                self.grammar.rule(rule_id), self.sentences,
                self.tp_sample_size, seed=self.seed * 1_000_003 + iteration,
                limits=self.params.limits)
            self.grammar.set_trigger_probability(rule_id, tp)
        self.iteration = iteration
        self.decision_log.append((iteration, cand.display(), property))
        if property not in (NEUTRAL, NEGATIVE):
            stats = self.last_stats
            assert stats is not None
            self.history.append(HistoryRow(
                iteration, cand.display(), property, cand.frequency,
                stats.avg_coverage, stats.fully_parsed_fraction,
                stats.avg_operations, stats.avg_tree_depth,
                stats.avg_leaf_count, stats.avg_null_leaf_count))
        self.pending = None
        return self.grammar

    # -- persistence

    def checkpoint(self, directory) -> None:
        """Atomically write grammar, session state and history under `directory`.

        A process killed between iterations resumes from here with the same
        iteration counter and the same pending candidate.
        """
        os.makedirs(directory, exist_ok=True)
        grammar_path = os.path.join(directory, "grammar.txt")
        _atomic(grammar_path, lambda p: save_grammar(self.grammar, p))
        state = {
            "iteration": self.iteration,
            "seed": self.seed,
            "priority": list(self.priority.layers),
            "stopped": self.stopped,
            "elapsed_seconds": self.elapsed_seconds(),
            "stop": {"max_iterations": self.stop_criteria.max_iterations,
                     "wall_clock_seconds": self.stop_criteria.wall_clock_seconds},
            "tp_sample_size": self.tp_sample_size,
            "beta": self.params.beta,
            "decision_log": [list(row) for row in self.decision_log],
            "pending": _candidate_to_json(self.pending),
            "last_stats": _stats_to_json(self.last_stats),
        }
        _atomic(os.path.join(directory, "session.json"),
                lambda p: _write_json(p, state))
        _atomic(os.path.join(directory, "history.csv"), self._write_history)

    def _write_history(self, path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(HistoryRow.FIELDS)
            for row in self.history:
                writer.writerow(row.as_list())


def _atomic(path, write) -> None:
    tmp = f"{path}.tmp"
    write(tmp)
    os.replace(tmp, path)


def _write_json(path, obj) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=1, sort_keys=True)
        fh.write("\n")


def _candidate_to_json(cand: Optional[CandidateRule]):
    if cand is None:
        return None
    return {
        "lhs": cand.lhs,
        "rhs": [s.display() for s in cand.rhs],
        "frequency": cand.frequency,
        "samples": [[s.sentence_id, s.start, s.end] for s in cand.samples],
    }


def _candidate_from_json(obj) -> Optional[CandidateRule]:
    if obj is None:
        return None
    return CandidateRule(
        obj["lhs"], tuple(parse_symbol(t) for t in obj["rhs"]),
        obj["frequency"],
        tuple(SampleRef(s[0], s[1], s[2]) for s in obj["samples"]))


def _stats_to_json(stats: Optional[ParseStats]):
    if stats is None:
        return None
    return {
        "sentences": stats.sentences,
        "fully_parsed_fraction": stats.fully_parsed_fraction,
        "avg_coverage": stats.avg_coverage,
        "avg_tree_depth": stats.avg_tree_depth,
        "avg_leaf_count": stats.avg_leaf_count,
        "avg_null_leaf_count": stats.avg_null_leaf_count,
        "avg_operations": stats.avg_operations,
    }


def _stats_from_json(obj) -> Optional[ParseStats]:
    if obj is None:
        return None
    return ParseStats(avg_parse_seconds=0.0, **obj)


def load_session(directory, sentences: Sequence[LayeredSentence],
                 workers: int = 1) -> InductionSession:
    """Rebuild a checkpointed session over the given corpus."""
    with open(os.path.join(directory, "session.json"), encoding="utf-8") as fh:
        state = json.load(fh)
    grammar = load_grammar(os.path.join(directory, "grammar.txt"))
    session = InductionSession(
        grammar, sentences, LayerPriority(tuple(state["priority"])),
        params=replace(DEFAULT_PARAMS, beta=state["beta"]),
        stop=StopCriteria(**state["stop"]),
        seed=state["seed"], workers=workers,
        tp_sample_size=state["tp_sample_size"])
    session.iteration = state["iteration"]
    session.stopped = state["stopped"]
    session._elapsed_offset = state["elapsed_seconds"]
    session.decision_log = [tuple(row) for row in state["decision_log"]]
    session.pending = _candidate_from_json(state["pending"])
    session.last_stats = _stats_from_json(state["last_stats"])
    history_path = os.path.join(directory, "history.csv")
    if os.path.exists(history_path):
        with open(history_path, newline="", encoding="utf-8") as fh:
            reader = csv.DictReader(fh)
            for rec in reader:
                session.history.append(HistoryRow(
                    int(rec["iteration"]), rec["rule"], rec["property"],
                    int(rec["frequency"]), float(rec["coverage"]),
                    float(rec["fully_parsed"]), float(rec["avg_operations"]),
                    float(rec["avg_tree_depth"]), float(rec["avg_leaf_count"]),
                    float(rec["avg_null_leaf_count"])))
    return session


# ---------------------------------------------------------------------------
# Script-driven runs


def parse_decision_script(path) -> dict[int, str]:
    """Read 'iteration <TAB> property' lines; '#' starts a comment."""
    decisions: dict[int, str] = {}
    with open(path, encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split("\t") if "\t" in line else line.split()
            if len(parts) != 2:
                raise InductionError(
                    f"{path}:{line_no}: expected 'iteration<TAB>property'")
            decisions[int(parts[0])] = parts[1].strip()
    return decisions


def run_scripted(session: InductionSession, decisions: Mapping[int, str],
                 iterations: int, auto: bool = False,
                 checkpoint_dir=None) -> InductionSession:
    """Drive a session from a decision table.

    Runs up to `iterations` decisions; iterations missing from the table get
    positive when `auto` is set and otherwise stop the session (mirroring
    the automatic-continuation mode after the interactive phase).
    """
    for _ in range(iterations):
        if session.stopped:
            break
        candidate = session.run_iteration()
        if checkpoint_dir:
            session.checkpoint(checkpoint_dir)
        if candidate is None:
            break
        prop = decisions.get(session.iteration + 1)
        if prop is None:
            if not auto:
                session.stop()
                break
            prop = POSITIVE
        session.apply_decision(prop)
        if checkpoint_dir:
            session.checkpoint(checkpoint_dir)
    return session
