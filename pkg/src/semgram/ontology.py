"""Ontology assertions mined from the grammar and from null nodes.

Positive class rules (rhs = one class symbol) map to subClassOf; positive
instance rules (rhs = one instance-layer token, or lexical tokens only) map
to isa, minting the instance identifier from the lexical label. Neutral and
negative rules assert nothing. Long-tail instances come from null nodes
whose generalized term is atomic; low-frequency groups are dropped.
"""

from __future__ import annotations

import csv
import logging
import random
from dataclasses import dataclass
from typing import Iterable, Mapping, Optional, Sequence

from .corpus import LEXICAL, LayeredSentence
from .grammar import POSITIVE, Grammar, Rule, Symbol
from .induction import LayerPriority, generalize_layers
from .parsing.parser import SemanticNode

log = logging.getLogger(__name__)

ISA = "isa"
SUBCLASS_OF = "subClassOf"

#: layers whose tokens denote ontology classes / instances in the reference
#: corpus schema; both are per-call parameters since layer names are free-form
DEFAULT_CLASS_LAYERS = frozenset({"class", "named-entity"})
DEFAULT_INSTANCE_LAYERS = frozenset({"instance"})


@dataclass(frozen=True)
class Assertion:
    """One ontology triple with provenance (isa is (instance, class))."""

    predicate: str
    subject: str
    object: str
    provenance: str
    confidence: Optional[float] = None
    frequency: Optional[int] = None

    @property
    def triple(self) -> tuple[str, str, str]:
        return (self.predicate, self.subject, self.object)


def mint_identifier(label: str) -> str:
    """Title-case and concatenate a lexical label: 'software engineer' ->
    'SoftwareEngineer'. Existing capitals survive."""
    return "".join(w[:1].upper() + w[1:] for w in label.split())


class Ontology:
    """Assertion store with class/instance registries and a seed partition."""

    def __init__(self):
        self.assertions: list[Assertion] = []
        self._triples: set[tuple[str, str, str]] = set()
        self.classes: set[str] = set()
        self.instances: set[str] = set()
        self.seed_triples: set[tuple[str, str, str]] = set()
        self._minted: dict[str, str] = {}

    def __len__(self) -> int:
        return len(self.assertions)

    def __contains__(self, triple: tuple[str, str, str]) -> bool:
        return triple in self._triples

    def add(self, assertion: Assertion, seed: bool = False) -> bool:
        """Register an assertion; duplicates (by triple) are ignored."""
        if not assertion.subject or not assertion.object:
            raise ValueError(f"empty identifier in {assertion}")
        if assertion.triple in self._triples:
            return False
        self.assertions.append(assertion)
        self._triples.add(assertion.triple)
        if seed:
            self.seed_triples.add(assertion.triple)
        if assertion.predicate == ISA:
            self.instances.add(assertion.subject)
            self.classes.add(assertion.object)
        elif assertion.predicate == SUBCLASS_OF:
            self.classes.update((assertion.subject, assertion.object))
        else:
            self.instances.update((assertion.subject, assertion.object))
        return True

    def mint(self, label: str, provenance: str = "") -> str:
        """Mint an instance identifier for a lexical label.

        Distinct labels colliding on the same identifier get numeric
        suffixes; the collision is logged with its provenance.
        """
        known = self._minted.get(label)
        if known is not None:
            return known
        base = mint_identifier(label)
        taken = set(self._minted.values()) | self.instances
        candidate = base
        n = 1
        while candidate in taken:
            n += 1
            candidate = f"{base}{n}"
        if candidate != base:
            log.warning("identifier collision: %r -> %r (%s)",
                        label, candidate, provenance)
        self._minted[label] = candidate
        return candidate

    def new_assertions(self) -> list[Assertion]:
        return [a for a in self.assertions if a.triple not in self.seed_triples]


# ---------------------------------------------------------------------------
# Taxonomy from the grammar


def _class_symbol_name(sym: Symbol, class_layers: frozenset[str]) -> Optional[str]:
    if sym.is_nonterminal:
        return sym.name
    if sym.is_terminal and sym.layer in class_layers:
        return sym.value
    return None


def extract_taxonomy(grammar: Grammar,
                     class_layers: frozenset[str] = DEFAULT_CLASS_LAYERS,
                     instance_layers: frozenset[str] = DEFAULT_INSTANCE_LAYERS,
                     ontology: Optional[Ontology] = None) -> list[Assertion]:
    """subClassOf / isa assertions read off the positive grammar rules.

    Only the two pure rule shapes assert anything: a single class symbol on
    the rhs (class rule), or an rhs that is one instance token or entirely
    lexical (instance rule). Mixed right-hand sides are neither.
    """
    if ontology is None:
        ontology = Ontology()
    out: list[Assertion] = []
    for rule in grammar:
        if rule.property != POSITIVE or rule.is_schema:
            continue
        assertion = _rule_assertion(rule, class_layers, instance_layers, ontology)
        if assertion is not None and ontology.add(assertion):
            out.append(assertion)
    return out


def _rule_assertion(rule: Rule, class_layers: frozenset[str],
                    instance_layers: frozenset[str],
                    ontology: Ontology) -> Optional[Assertion]:
    lhs = rule.lhs.name
    provenance = f"rule:{rule.id}"
    if len(rule.rhs) == 1:
        sym = rule.rhs[0]
        class_name = _class_symbol_name(sym, class_layers)
        if class_name is not None:
            if class_name == lhs:
                return None  # identity rules carry no taxonomic content
            return Assertion(SUBCLASS_OF, class_name, lhs, provenance)
        if sym.is_terminal and sym.layer in instance_layers:
            return Assertion(ISA, sym.value, lhs, provenance)
    if rule.rhs and all(s.is_terminal and s.layer == LEXICAL for s in rule.rhs):
        label = " ".join(s.value for s in rule.rhs)
        return Assertion(ISA, ontology.mint(label, provenance), lhs, provenance)
    return None


# ---------------------------------------------------------------------------
# Inference


def infer_relations(new: Sequence[Assertion],
                    seed: Sequence[Assertion]) -> list[Assertion]:
    """Close subClassOf transitively and lift isa through it.

    Inferred assertions carry their derivation chain as provenance. Output
    excludes anything already stated; running the function again over
    (input + output) adds nothing. subClassOf cycles are reported and
    closure is not propagated through them.
    """
    stated = {a.triple for a in new} | {a.triple for a in seed}
    edges: dict[str, set[str]] = {}
    for a in list(new) + list(seed):
        if a.predicate == SUBCLASS_OF:
            edges.setdefault(a.subject, set()).add(a.object)
    cyclic = _cyclic_nodes(edges)
    if cyclic:
        log.warning("subClassOf cycle through %s; closure skips these nodes",
                    sorted(cyclic))
    closure: dict[str, dict[str, tuple[str, ...]]] = {}

    def ancestors(node: str) -> dict[str, tuple[str, ...]]:
        """superclass -> derivation chain (node, ..., superclass)."""
        if node in closure:
            return closure[node]
        closure[node] = {}
        if node in cyclic:
            return closure[node]
        found: dict[str, tuple[str, ...]] = {}
        for parent in sorted(edges.get(node, ())):
            if parent in cyclic:
                continue
            found.setdefault(parent, (node, parent))
            for above, chain in ancestors(parent).items():
                found.setdefault(above, (node,) + chain)
        closure[node] = found
        return found

    inferred: list[Assertion] = []
    emitted: set[tuple[str, str, str]] = set(stated)

    def emit(assertion: Assertion) -> None:
        if assertion.triple not in emitted:
            emitted.add(assertion.triple)
            inferred.append(assertion)

    for node in sorted(edges):
        for above, chain in ancestors(node).items():
            emit(Assertion(SUBCLASS_OF, node, above,
                           "inferred:" + "<".join(chain)))
    for a in list(new) + list(seed):
        if a.predicate != ISA:
            continue
        for above, chain in ancestors(a.object).items():
            emit(Assertion(ISA, a.subject, above,
                           f"inferred:isa({a.subject},{a.object})+"
                           + "<".join(chain)))
    return inferred


def _cyclic_nodes(edges: Mapping[str, set[str]]) -> set[str]:
    """Nodes on a subClassOf cycle (Tarjan SCCs of size > 1, or self-loops)."""
    index: dict[str, int] = {}
    low: dict[str, int] = {}
    on_stack: set[str] = set()
    stack: list[str] = []
    cyclic: set[str] = set()
    counter = [0]

    def strongconnect(v: str) -> None:
        index[v] = low[v] = counter[0]
        counter[0] += 1
        stack.append(v)
        on_stack.add(v)
        for w in sorted(edges.get(v, ())):
            if w not in index:
                strongconnect(w)
                low[v] = min(low[v], low[w])
            elif w in on_stack:
                low[v] = min(low[v], index[w])
        if low[v] == index[v]:
            scc = []
            while True:
                w = stack.pop()
                on_stack.discard(w)
                scc.append(w)
                if w == v:
                    break
            if len(scc) > 1 or v in edges.get(v, ()):
                cyclic.update(scc)

    for v in sorted(edges):
        if v not in index:
            strongconnect(v)
    return cyclic


# ---------------------------------------------------------------------------
# Long-tail instances from null nodes


def extract_instances(nodes: Iterable[SemanticNode],
                      sentences: Mapping[str, LayeredSentence],
                      min_frequency: int = 3,
                      priority: Optional[LayerPriority] = None,
                      instance_layers: frozenset[str] = DEFAULT_INSTANCE_LAYERS,
                      ontology: Optional[Ontology] = None) -> list[Assertion]:
    """isa assertions from null-node terms that look like instances.

    Terms are layer-generalized (default priority: instance layers, then
    lexical); only atomic results survive -- a single instance token, or
    lexical tokens only. Groups below `min_frequency` are dropped; the rest
    come back sorted by frequency, descending.
    """
    if min_frequency < 1:
        raise ValueError("min_frequency must be >= 1")
    if priority is None:
        priority = LayerPriority(tuple(sorted(instance_layers)) + (LEXICAL,))
    if ontology is None:
        ontology = Ontology()
    counts: dict[tuple[str, str], int] = {}
    for node in nodes:
        if not node.is_null:
            continue
        sent = sentences[node.term.sentence_id]
        symbols = generalize_layers(node.term, sent, priority)
        instance = _atomic_instance(symbols, instance_layers, ontology)
        if instance is None:
            continue
        counts[(node.class_name, instance)] = counts.get(
            (node.class_name, instance), 0) + 1
    ranked = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
    out = []
    for (class_name, instance), freq in ranked:
        if freq < min_frequency:
            continue
        a = Assertion(ISA, instance, class_name,
                      f"null-nodes:{freq}", frequency=freq)
        if ontology.add(a):
            out.append(a)
    return out


def _atomic_instance(symbols: Sequence[Symbol],
                     instance_layers: frozenset[str],
                     ontology: Ontology) -> Optional[str]:
    if len(symbols) == 1 and symbols[0].layer in instance_layers:
        return symbols[0].value
    if all(s.layer == LEXICAL for s in symbols):
        label = " ".join(s.value for s in symbols)
        return ontology.mint(label, "null-node term")
    return None


# ---------------------------------------------------------------------------
# Triple file and evaluation-sample export


def save_assertions(assertions: Iterable[Assertion], path) -> None:
    """Tab-separated: predicate, subject, object, provenance[, frequency]."""
    with open(path, "w", encoding="utf-8") as fh:
        for a in assertions:
            row = [a.predicate, a.subject, a.object, a.provenance]
            if a.frequency is not None:
                row.append(str(a.frequency))
            fh.write("\t".join(row) + "\n")


def load_assertions(path) -> list[Assertion]:
    out = []
    with open(path, encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n")
            if not line.strip() or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) < 3:
                raise ValueError(f"{path}:{line_no}: expected at least "
                                 "'predicate<TAB>subject<TAB>object'")
            provenance = parts[3] if len(parts) > 3 else "file"
            frequency = int(parts[4]) if len(parts) > 4 else None
            out.append(Assertion(parts[0], parts[1], parts[2],
                                 provenance, frequency=frequency))
    return out


def export_evaluation_sample(assertions: Sequence[Assertion], path,
                             per_class: int = 100, seed: int = 0) -> None:
    """CSV sample for manual accuracy judgment: up to `per_class` random isa
    assertions per class, with an empty 'correct' column to fill in."""
    rng = random.Random(seed)
    by_class: dict[str, list[Assertion]] = {}
    for a in assertions:
        if a.predicate == ISA:
            by_class.setdefault(a.object, []).append(a)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["class", "instance", "frequency", "correct"])
        for class_name in sorted(by_class):
            group = by_class[class_name]
            if len(group) > per_class:
                group = rng.sample(group, per_class)
            for a in sorted(group, key=lambda x: x.subject):
                writer.writerow([class_name, a.subject, a.frequency or "", ""])
