"""Prediction over whole trees, and evaluation with conversion bookkeeping.

Prediction enumerates candidate sub-trees with as many designated entity
leaves as the relation has arguments (arity 1: exactly the root-to-leaf
paths) and returns the leaf terms of every candidate the model accepts.

Evaluation is value-level: a prediction is correct when its term, rendered
in the gold argument's layer, equals the gold value. Examples whose object
never occurs in the sentence are ineligible and ignored; eligible ones
either convert to a variable tree or fail as split/subterm, and unconverted
positives count as recall misses. Converted recall/F1 restrict the
denominator to converted examples. All metrics pool counts (micro).
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Mapping, Optional, Sequence

from ..corpus import LayeredSentence, Term, interpret
from ..parsing.parser import SemanticTree
from .models import LR, LRC, LRCL, BasicModel, RelationModel, TrainConfig, train
from .trees import (
    DATE, DEFAULT_KIND_LAYERS, NO_MATCH, SPLIT, SUBTERM, ConversionFailure,
    Located, RelationExample, VariableTree, candidate_leaf_sets,
    extract_variable_tree, locate_entity_nodes, render_date,
)


def predict(model: RelationModel, tree: SemanticTree,
            sentence: LayeredSentence, arity: int = 1) -> list[tuple[Term, ...]]:
    """Argument-term tuples for every candidate sub-tree the model accepts."""
    out: list[tuple[Term, ...]] = []
    for leaves in candidate_leaf_sets(tree, arity):
        vt = extract_variable_tree(tree, leaves, sentence)
        if model.predict_tree(vt):
            out.append(tuple(node.term for node in leaves))
    return out


def render_term(term: Term, kind: str, sentence: LayeredSentence,
                kind_layers: Mapping[str, str] = DEFAULT_KIND_LAYERS,
                ) -> Optional[str]:
    """A predicted term as a comparable argument value, or None.

    Resource kinds render as the single covering token of their layer;
    date/string kinds render as the lexical words.
    """
    layer = kind_layers[kind]
    if layer not in sentence.layers:
        return None
    reading = interpret(sentence, term, layer)
    if not reading.valid:
        return None
    if layer == "lexical":
        return " ".join(t.value for t in reading.tokens)
    tokens = reading.non_null_tokens()
    if len(reading.tokens) == 1 and len(tokens) == 1:
        return tokens[0].value
    return None


def gold_value(value: str, kind: str) -> str:
    return render_date(value) if kind == DATE else value


@dataclass(frozen=True)
class ConversionStats:
    """Outcome counts over eligible examples; the fractions sum to one."""

    converted: int = 0
    split: int = 0
    subterm: int = 0

    @property
    def eligible(self) -> int:
        return self.converted + self.split + self.subterm

    def fraction(self, name: str) -> float:
        total = self.eligible
        return getattr(self, name) / total if total else 0.0

    def __add__(self, other: "ConversionStats") -> "ConversionStats":
        return ConversionStats(self.converted + other.converted,
                               self.split + other.split,
                               self.subterm + other.subterm)


@dataclass(frozen=True)
class EvalCounts:
    tp: int = 0
    fp: int = 0
    fn: int = 0
    converted_tp: int = 0
    converted_fn: int = 0
    ineligible: int = 0

    def __add__(self, other: "EvalCounts") -> "EvalCounts":
        return EvalCounts(*(getattr(self, f) + getattr(other, f)
                            for f in ("tp", "fp", "fn", "converted_tp",
                                      "converted_fn", "ineligible")))


def _safe_div(a: float, b: float) -> float:
    return a / b if b else 0.0


def _f1(precision: float, recall: float) -> float:
    return _safe_div(2 * precision * recall, precision + recall)


@dataclass(frozen=True)
class EvalResult:
    counts: EvalCounts
    conversion: ConversionStats

    @property
    def precision(self) -> float:
        return _safe_div(self.counts.tp, self.counts.tp + self.counts.fp)

    @property
    def recall(self) -> float:
        return _safe_div(self.counts.tp, self.counts.tp + self.counts.fn)

    @property
    def converted_recall(self) -> float:
        return _safe_div(self.counts.converted_tp,
                         self.counts.converted_tp + self.counts.converted_fn)

    @property
    def f1(self) -> float:
        return _f1(self.precision, self.recall)

    @property
    def converted_f1(self) -> float:
        return _f1(self.precision, self.converted_recall)

    def row(self) -> dict:
        return {
            "precision": self.precision,
            "converted_recall": self.converted_recall,
            "recall": self.recall,
            "converted_f1": self.converted_f1,
            "f1": self.f1,
            "converted": self.conversion.fraction("converted"),
            "split": self.conversion.fraction("split"),
            "subterm": self.conversion.fraction("subterm"),
        }


def convert_examples(examples: Sequence[RelationExample],
                     trees: Mapping[str, SemanticTree],
                     sentences: Mapping[str, LayeredSentence],
                     kind_layers: Mapping[str, str] = DEFAULT_KIND_LAYERS,
                     ) -> tuple[list[tuple[RelationExample, Located, VariableTree]],
                                list[tuple[RelationExample, ConversionFailure]],
                                ConversionStats]:
    """Split examples into converted (with their variable trees) and failed."""
    converted = []
    failed = []
    stats = ConversionStats()
    for ex in examples:
        sentence = sentences[ex.sentence_id]
        tree = trees[ex.sentence_id]
        located = locate_entity_nodes(ex, sentence, tree, kind_layers)
        if isinstance(located, ConversionFailure):
            failed.append((ex, located))
            if located.reason == SPLIT:
                stats += ConversionStats(split=1)
            elif located.reason == SUBTERM:
                stats += ConversionStats(subterm=1)
            continue
        vt = extract_variable_tree(tree, located.nodes, sentences[ex.sentence_id])
        converted.append((ex, located, vt))
        stats += ConversionStats(converted=1)
    return converted, failed, stats


def evaluate(model: RelationModel, examples: Sequence[RelationExample],
             trees: Mapping[str, SemanticTree],
             sentences: Mapping[str, LayeredSentence],
             kind_layers: Mapping[str, str] = DEFAULT_KIND_LAYERS,
             arity: int = 1) -> EvalResult:
    """Score the model against gold examples (single relation type or pooled)."""
    converted, failed, conv_stats = convert_examples(
        examples, trees, sentences, kind_layers)
    eligible_failed = [(ex, f) for ex, f in failed if f.reason != NO_MATCH]
    ineligible = len(failed) - len(eligible_failed)

    by_sentence: dict[str, list] = {}
    for ex, located, vt in converted:
        by_sentence.setdefault(ex.sentence_id, []).append((ex, True))
    for ex, failure in eligible_failed:
        by_sentence.setdefault(ex.sentence_id, []).append((ex, False))

    counts = EvalCounts(ineligible=ineligible)
    for sid, golds in sorted(by_sentence.items()):
        sentence = sentences[sid]
        predictions = predict(model, trees[sid], sentence, arity)
        pred_terms = {terms[0] for terms in predictions}
        matched_preds: set = set()
        tp = fp = fn = ctp = cfn = 0
        for ex, was_converted in golds:
            value, kind = ex.arguments[0]
            want = gold_value(value, kind)
            hit = False
            for term in pred_terms:
                if render_term(term, kind, sentence, kind_layers) == want:
                    hit = True
                    matched_preds.add(term)
            if hit:
                tp += 1
                if was_converted:
                    ctp += 1
            else:
                fn += 1
                if was_converted:
                    cfn += 1
        fp = len(pred_terms - matched_preds)
        counts += EvalCounts(tp, fp, fn, ctp, cfn)
    return EvalResult(counts, conv_stats)


# ---------------------------------------------------------------------------
# Negative sampling and cross-validation


def sample_negatives(positives: Sequence[tuple[str, VariableTree]],
                     sentence_ids: Sequence[str],
                     trees: Mapping[str, SemanticTree],
                     sentences: Mapping[str, LayeredSentence],
                     ratio: int = 10, seed: int = 0,
                     arity: int = 1) -> list[VariableTree]:
    """Candidate sub-trees of the training sentences that present no relation.

    `positives` pairs each positive variable tree with its sentence id: a
    candidate is excluded only when it is a gold sub-tree of its own
    sentence, so a structure that is positive elsewhere still yields
    negatives here. Exhaustive when at most ratio * len(positives)
    candidates exist, otherwise a seeded uniform sample of that size.
    """
    positive_keys = {(sid, vt.canonical) for sid, vt in positives}
    pool: list[VariableTree] = []
    seen: set[tuple[str, str]] = set()
    for sid in sentence_ids:
        tree = trees[sid]
        sentence = sentences[sid]
        for leaves in candidate_leaf_sets(tree, arity):
            vt = extract_variable_tree(tree, leaves, sentence)
            key = (sid, vt.canonical)
            if key in positive_keys or key in seen:
                continue
            seen.add(key)
            pool.append(vt)
    cap = ratio * max(1, len(positives))
    if len(pool) > cap:
        rng = random.Random(seed)
        pool = rng.sample(pool, cap)
    return pool


@dataclass(frozen=True)
class CrossValidationReport:
    per_relation: dict[str, EvalResult]
    overall: EvalResult

    def table(self) -> str:
        header = (f"{'relation':<24} {'P':>7} {'cR':>7} {'R':>7} "
                  f"{'cF1':>7} {'F1':>7}")
        lines = [header, "-" * len(header)]
        rows = list(self.per_relation.items()) + [("ALL (micro)", self.overall)]
        for name, res in rows:
            lines.append(
                f"{name:<24} {res.precision:>7.3f} {res.converted_recall:>7.3f} "
                f"{res.recall:>7.3f} {res.converted_f1:>7.3f} {res.f1:>7.3f}")
        return "\n".join(lines)


def crossvalidate(kind: str, examples: Sequence[RelationExample],
                  trees: Mapping[str, SemanticTree],
                  sentences: Mapping[str, LayeredSentence],
                  folds: int = 10, seed: int = 0,
                  negative_ratio: int = 10,
                  config: TrainConfig = TrainConfig(),
                  kind_layers: Mapping[str, str] = DEFAULT_KIND_LAYERS,
                  ) -> CrossValidationReport:
    """K-fold evaluation per relation type, pooled into micro metrics."""
    by_predicate: dict[str, list[RelationExample]] = {}
    for ex in examples:
        by_predicate.setdefault(ex.predicate, []).append(ex)
    per_relation: dict[str, EvalResult] = {}
    total_counts = EvalCounts()
    total_conv = ConversionStats()
    for predicate in sorted(by_predicate):
        exs = sorted(by_predicate[predicate],
                     key=lambda e: (e.sentence_id, e.arguments))
        rng = random.Random(seed)
        rng.shuffle(exs)
        k = min(folds, len(exs))
        counts = EvalCounts()
        conv = ConversionStats()
        for fold in range(k):
            test = exs[fold::k]
            training = [e for i, e in enumerate(exs) if i % k != fold]
            result = _run_fold(kind, training, test, trees, sentences,
                               seed + fold, negative_ratio, config, kind_layers)
            counts += result.counts
            conv += result.conversion
        per_relation[predicate] = EvalResult(counts, conv)
        total_counts += counts
        total_conv += conv
    return CrossValidationReport(per_relation, EvalResult(total_counts, total_conv))


def _run_fold(kind, training, test, trees, sentences, seed, negative_ratio,
              config, kind_layers) -> EvalResult:
    converted, _failed, _stats = convert_examples(
        training, trees, sentences, kind_layers)
    positives = [vt for _ex, _loc, vt in converted]
    model: RelationModel
    if not positives:
        # nothing to learn from: a model that predicts nothing still yields
        # misses and conversion bookkeeping on the test fold
        model = BasicModel(frozenset())
    else:
        negatives: Sequence[VariableTree] = ()
        if kind in (LR, LRC, LRCL):
            train_sids = sorted({ex.sentence_id for ex, _l, _v in converted})
            negatives = sample_negatives(
                [(ex.sentence_id, vt) for ex, _l, vt in converted],
                train_sids, trees, sentences, negative_ratio, seed)
        if kind in (LR, LRC, LRCL) and not negatives:
            model = BasicModel(frozenset(vt.canonical for vt in positives))
        else:
            model = train(kind, positives, negatives, config)
    return evaluate(model, test, trees, sentences, kind_layers)
