"""Parsed-tree dumps: JSON Lines, one tree per sentence.

Each line is {"sentence_id", "grammar_version", "operations", "root"} with
root = {"class", "rule_id" (null for null nodes), "span": [start, end),
"children": [...]}. Statuses are recomputed on load; reliabilities are not
persisted (they only matter while parsing).
"""

from __future__ import annotations

import json
from typing import Iterable

from .corpus import Term
from .parsing.parser import FULLY_PARSED, NULL, PARTIALLY_PARSED, SemanticNode, SemanticTree


def _node_to_json(node: SemanticNode) -> dict:
    return {
        "class": node.class_name,
        "rule_id": node.rule_id,
        "span": [node.term.start, node.term.end],
        "children": [_node_to_json(c) for c in node.children],
    }


def _node_from_json(obj: dict, sentence_id: str) -> SemanticNode:
    children = tuple(_node_from_json(c, sentence_id) for c in obj["children"])
    rule_id = obj["rule_id"]
    if rule_id is None:
        status, score = NULL, 0.0
    elif all(c.status == FULLY_PARSED for c in children):
        status, score = FULLY_PARSED, 1.0
    else:
        status, score = PARTIALLY_PARSED, 0.0
    term = Term(sentence_id, obj["span"][0], obj["span"][1])
    return SemanticNode(obj["class"], rule_id, term, children, status, score)


def save_trees(trees: Iterable[SemanticTree], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for tree in trees:
            fh.write(json.dumps({
                "sentence_id": tree.sentence_id,
                "grammar_version": tree.grammar_version,
                "operations": tree.operations,
                "root": _node_to_json(tree.root),
            }, ensure_ascii=False, separators=(",", ":")))
            fh.write("\n")


def load_trees(path) -> list[SemanticTree]:
    out = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            obj = json.loads(line)
            sid = obj["sentence_id"]
            out.append(SemanticTree(
                _node_from_json(obj["root"], sid), sid,
                obj.get("grammar_version", 0), obj.get("operations", 0)))
    return out
