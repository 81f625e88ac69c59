"""Variable trees: anonymized path skeletons used as relation examples.

A relation example names a sentence and the argument values to find in it.
Each argument is matched against the layer its value kind lives in; the
matched sub-term must equal some tree node's term exactly, otherwise the
example fails conversion (split across nodes, or a strict sub-term of one).
The minimal subtree spanning the entity nodes -- the union of their root
paths -- is then anonymized into a variable tree: nodes keep only their
class, rule and child position, entity nodes also their argument position.
Two structurally identical extractions yield equal canonical forms no matter
what words the sentences contained.

For the feature-based models the variable tree also carries its context
(leaf siblings of its nodes in the original tree) and the entity nodes'
lexical tokens; neither participates in the canonical form.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Optional, Sequence, Union

from ..corpus import LEXICAL, LayeredSentence, Term, interpret
from ..parsing.parser import SemanticNode, SemanticTree

RESOURCE = "resource"
DATE = "date"
STRING = "string"

#: which layer each argument kind is matched against
DEFAULT_KIND_LAYERS: Mapping[str, str] = {
    RESOURCE: "instance",
    DATE: LEXICAL,
    STRING: LEXICAL,
}

SPLIT = "split"
SUBTERM = "subterm"
NO_MATCH = "no-match"

_MONTHS = ("January", "February", "March", "April", "May", "June", "July",
           "August", "September", "October", "November", "December")


def render_date(value: str, months: Sequence[str] = _MONTHS) -> str:
    """ISO date -> the day-first spelling used in the corpus lexical layer.

    '1883-06-24' -> '24 June 1883'; a bare year or anything non-ISO passes
    through unchanged.
    """
    parts = value.split("-")
    if len(parts) == 3 and all(p.isdigit() for p in parts):
        year, month, day = (int(p) for p in parts)
        if 1 <= month <= 12:
            return f"{day} {months[month - 1]} {year}"
    return value


@dataclass(frozen=True)
class RelationExample:
    """One relation fact: predicate, argument values, and the sentence
    (identified by id) expressing it."""

    predicate: str
    arguments: tuple[tuple[str, str], ...]  # (value, kind) per argument
    sentence_id: str

    def __post_init__(self):
        if not self.arguments:
            raise ValueError("relation example needs at least one argument")


@dataclass(frozen=True)
class ConversionFailure:
    reason: str            # split | subterm | no-match
    argument_index: int


@dataclass(frozen=True)
class Located:
    """Entity nodes (argument order) and the matched spans."""

    nodes: tuple[SemanticNode, ...]
    spans: tuple[tuple[int, int], ...]


def argument_spans(value: str, kind: str, sentence: LayeredSentence,
                   kind_layers: Mapping[str, str] = DEFAULT_KIND_LAYERS,
                   ) -> list[tuple[int, int]]:
    """All occurrences of an argument value in its layer, left to right."""
    layer = kind_layers[kind]
    if layer == LEXICAL:
        words = (render_date(value) if kind == DATE else value).split()
        if not words:
            return []
        n = len(words)
        return [
            (i, i + n) for i in range(sentence.length - n + 1)
            if list(sentence.words[i:i + n]) == words
        ]
    toks = sentence.layers.get(layer, ())
    return [(t.start, t.end) for t in toks if t.value == value]


def _deepest_exact(node: SemanticNode, start: int, end: int,
                   ) -> Optional[SemanticNode]:
    if not (node.term.start <= start and end <= node.term.end):
        return None
    for child in node.children:
        found = _deepest_exact(child, start, end)
        if found is not None:
            return found
    if node.term.start == start and node.term.end == end:
        return node
    return None


def _failure_reason(root: SemanticNode, start: int, end: int) -> str:
    node = root
    while True:
        inner = next((c for c in node.children
                      if c.term.start <= start and end <= c.term.end), None)
        if inner is None:
            break
        node = inner
    return SUBTERM if not node.children else SPLIT


def locate_entity_nodes(example: RelationExample, sentence: LayeredSentence,
                        tree: SemanticTree,
                        kind_layers: Mapping[str, str] = DEFAULT_KIND_LAYERS,
                        ) -> Union[Located, ConversionFailure]:
    """Map each argument to the tree node whose term equals it exactly.

    Tries value occurrences left to right and takes the first that lands on
    a node. When none does, the failure of the leftmost occurrence is
    reported (split across nodes / strict sub-term); a value not found in
    its layer at all is no-match, i.e. the example was never eligible.
    """
    nodes: list[SemanticNode] = []
    spans: list[tuple[int, int]] = []
    for idx, (value, kind) in enumerate(example.arguments):
        occurrences = argument_spans(value, kind, sentence, kind_layers)
        if not occurrences:
            return ConversionFailure(NO_MATCH, idx)
        found = None
        for start, end in occurrences:
            found = _deepest_exact(tree.root, start, end)
            if found is not None:
                spans.append((start, end))
                break
        if found is None:
            start, end = occurrences[0]
            return ConversionFailure(_failure_reason(tree.root, start, end), idx)
        nodes.append(found)
    return Located(tuple(nodes), tuple(spans))


# ---------------------------------------------------------------------------
# Variable trees


@dataclass(frozen=True)
class VariableNode:
    class_name: str
    rule_id: Optional[int]
    child_position: int                # -1 at the root
    argument_position: Optional[int]   # set on entity nodes only
    children: tuple["VariableNode", ...] = ()

    def signature(self) -> str:
        rule = "null" if self.rule_id is None else str(self.rule_id)
        return f"{self.class_name}|{rule}|{self.child_position}"


def _canonical(node: VariableNode) -> str:
    arg = "" if node.argument_position is None else f"?{node.argument_position}"
    inner = " ".join(_canonical(c) for c in node.children)
    return f"({node.signature()}{arg}" + (f" {inner})" if inner else ")")


@dataclass(frozen=True)
class VariableTree:
    """Anonymized spanning subtree; equal structure means equal canonical."""

    root: VariableNode
    canonical: str
    context: tuple[str, ...] = ()        # leaf-sibling signatures, sorted
    entity_tokens: tuple[str, ...] = ()  # lexical words under entity nodes, sorted

    def is_path(self) -> bool:
        node = self.root
        while node.children:
            if len(node.children) > 1:
                return False
            node = node.children[0]
        return True

    def path_signatures(self) -> list[str]:
        """Root-to-leaf signatures incl. argument marks; path trees only."""
        out = []
        node = self.root
        while True:
            arg = ("" if node.argument_position is None
                   else f"?{node.argument_position}")
            out.append(node.signature() + arg)
            if not node.children:
                return out
            if len(node.children) > 1:
                raise ValueError("variable tree is not a path")
            node = node.children[0]


def extract_variable_tree(tree: SemanticTree,
                          entity_nodes: Sequence[SemanticNode],
                          sentence: Optional[LayeredSentence] = None,
                          ) -> VariableTree:
    """Anonymize the union of root paths to the entity nodes.

    A single entity yields the root-to-node path. Entity nodes are marked
    with their position in `entity_nodes`. With the sentence given, the
    entity nodes' lexical words are captured for lexical-feature models.
    """
    if not entity_nodes:
        raise ValueError("no entity nodes")
    args_by_id: dict[int, int] = {}
    for pos, node in enumerate(entity_nodes):
        args_by_id.setdefault(id(node), pos)
    tree_ids = {id(n) for n in tree.root.walk()}
    for node in entity_nodes:
        if id(node) not in tree_ids:
            raise ValueError(f"entity node {node.class_name} over "
                             f"{node.term.span} is not part of the tree")
    context: list[str] = []

    def build(node: SemanticNode, position: int) -> Optional[VariableNode]:
        kept_children = []
        child_leaf_sigs = []
        for i, child in enumerate(node.children):
            built = build(child, i)
            if built is not None:
                kept_children.append(built)
            elif not child.children:
                rule = "null" if child.rule_id is None else str(child.rule_id)
                child_leaf_sigs.append(f"{child.class_name}|{rule}|{i}")
        is_entity = id(node) in args_by_id
        if not kept_children and not is_entity:
            return None
        if kept_children:  # leaf siblings of kept nodes, not entity children
            context.extend(child_leaf_sigs)
        return VariableNode(node.class_name, node.rule_id, position,
                            args_by_id.get(id(node)), tuple(kept_children))

    root = build(tree.root, -1)
    assert root is not None
    tokens: set[str] = set()
    if sentence is not None:
        for node in entity_nodes:
            tokens.update(sentence.words[node.term.start:node.term.end])
    return VariableTree(root, _canonical(root),
                        tuple(sorted(context)), tuple(sorted(tokens)))


def candidate_leaf_sets(tree: SemanticTree, arity: int,
                        ) -> list[tuple[SemanticNode, ...]]:
    """All ways to pick `arity` distinct leaves, argument order significant.

    Arity 1 enumerates exactly the root-to-leaf paths (one per leaf). For
    higher arities every assignment of argument positions to the chosen
    leaves is produced, mirroring how prediction must try each one.
    """
    from itertools import combinations, permutations
    leaves = list(tree.root.leaves())
    if arity == 1:
        return [(leaf,) for leaf in leaves]
    out: list[tuple[SemanticNode, ...]] = []
    for combo in combinations(leaves, arity):
        for perm in permutations(combo):
            out.append(perm)
    return out
