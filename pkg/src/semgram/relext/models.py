"""Relation models over variable trees.

Five families, in increasing generality:

    basic  memorizes the positive variable trees; a test tree must be equal.
    net    merges the positive paths into a deterministic automaton whose
           states are variable nodes; a test path is accepted when all its
           transitions exist and it ends in an accepting state. Merging
           recombines path prefixes and suffixes seen in different training
           examples, so it accepts a superset of the basic model.
    lr     logistic regression; each variable node is a binary feature.
    lrc    lr plus context features (leaf siblings of the path nodes).
    lrcl   lrc plus the lexical tokens of the entity nodes.

Training the lr family needs negative examples; basic and net do not.
The classifier is fit from scratch by batch gradient descent with L2
regularization and a backtracking step size.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from .trees import VariableTree

BASIC = "basic"
NET = "net"
LR = "lr"
LRC = "lrc"
LRCL = "lrcl"
KINDS = (BASIC, NET, LR, LRC, LRCL)


@dataclass(frozen=True)
class TrainConfig:
    l2: float = 1.0
    max_epochs: int = 500
    gradient_tolerance: float = 1e-6
    threshold: float = 0.5


@dataclass(frozen=True)
class BasicModel:
    kind = BASIC
    positives: frozenset[str]  # canonical forms

    def predict_tree(self, tree: VariableTree) -> bool:
        return tree.canonical in self.positives


@dataclass(frozen=True)
class NetModel:
    kind = NET
    fractions: dict[str, float]  # state -> fraction of training trees with it
    edges: frozenset[tuple[str, str]]
    starts: frozenset[str]
    accepts: frozenset[str]

    def predict_tree(self, tree: VariableTree) -> bool:
        if not tree.is_path():
            return False
        path = tree.path_signatures()
        if path[0] not in self.starts:
            return False
        for a, b in zip(path, path[1:]):
            if (a, b) not in self.edges:
                return False
        return path[-1] in self.accepts


@dataclass
class LinearModel:
    kind: str  # lr | lrc | lrcl
    vocabulary: dict[str, int]
    weights: np.ndarray
    bias: float
    threshold: float = 0.5

    def features(self, tree: VariableTree) -> list[str]:
        return extract_features(tree, self.kind)

    def probability(self, tree: VariableTree) -> float:
        z = self.bias
        for name in self.features(tree):
            idx = self.vocabulary.get(name)
            if idx is not None:  # unseen features are ignored
                z += self.weights[idx]
        return _sigmoid(z)

    def predict_tree(self, tree: VariableTree) -> bool:
        return self.probability(tree) >= self.threshold


RelationModel = Union[BasicModel, NetModel, LinearModel]


def extract_features(tree: VariableTree, kind: str) -> list[str]:
    feats = [f"node:{node.signature()}" for node in _walk(tree)]
    if kind in (LRC, LRCL):
        feats.extend(f"ctx:{sig}" for sig in tree.context)
    if kind == LRCL:
        feats.extend(f"tok:{tok}" for tok in tree.entity_tokens)
    return feats


def _walk(tree: VariableTree):
    stack = [tree.root]
    while stack:
        node = stack.pop()
        yield node
        stack.extend(reversed(node.children))


def _sigmoid(z) -> float:
    return 1.0 / (1.0 + np.exp(-z))


def train(kind: str, positives: Sequence[VariableTree],
          negatives: Sequence[VariableTree] = (),
          config: TrainConfig = TrainConfig()) -> RelationModel:
    """Fit one model family on variable-tree examples."""
    if kind not in KINDS:
        raise ValueError(f"unknown model kind {kind!r}")
    if not positives:
        raise ValueError("training needs at least one positive example")
    if kind == BASIC:
        return BasicModel(frozenset(t.canonical for t in positives))
    if kind == NET:
        return _train_net(positives)
    if not negatives:
        raise ValueError(f"the {kind} model needs negative examples")
    return _train_linear(kind, positives, negatives, config)


def _train_net(positives: Sequence[VariableTree]) -> NetModel:
    counts: dict[str, int] = {}
    edges: set[tuple[str, str]] = set()
    starts: set[str] = set()
    accepts: set[str] = set()
    for tree in positives:
        if not tree.is_path():
            raise ValueError("the net model requires path-shaped variable "
                             "trees (single-entity examples)")
        path = tree.path_signatures()
        starts.add(path[0])
        accepts.add(path[-1])
        for sig in set(path):
            counts[sig] = counts.get(sig, 0) + 1
        edges.update(zip(path, path[1:]))
    n = len(positives)
    fractions = {sig: c / n for sig, c in counts.items()}
    return NetModel(fractions, frozenset(edges), frozenset(starts),
                    frozenset(accepts))


def nll_and_gradient(weights: np.ndarray, bias: float, x: np.ndarray,
                     y: np.ndarray, l2: float,
                     ) -> tuple[float, np.ndarray, float]:
    """Mean negative log-likelihood with L2 penalty, and its gradient.

    The penalty is l2 * ||w||^2 / (2n); the bias is not regularized.
    """
    n = len(y)
    z = x @ weights + bias
    # log(1 + e^z) computed stably on both tails
    log1pexp = np.logaddexp(0.0, z)
    loss = float(np.mean(log1pexp - y * z) + l2 * weights @ weights / (2 * n))
    p = 1.0 / (1.0 + np.exp(-z))
    grad_w = (x.T @ (p - y) + l2 * weights) / n
    grad_b = float(np.mean(p - y))
    return loss, grad_w, grad_b


def _train_linear(kind: str, positives: Sequence[VariableTree],
                  negatives: Sequence[VariableTree],
                  config: TrainConfig) -> LinearModel:
    vocab: dict[str, int] = {}
    rows: list[list[int]] = []
    y = np.zeros(len(positives) + len(negatives))
    for i, tree in enumerate(list(positives) + list(negatives)):
        row = []
        for name in extract_features(tree, kind):
            idx = vocab.setdefault(name, len(vocab))
            row.append(idx)
        rows.append(row)
        y[i] = 1.0 if i < len(positives) else 0.0
    x = np.zeros((len(rows), len(vocab)))
    for i, row in enumerate(rows):
        x[i, row] = 1.0
    weights = np.zeros(len(vocab))
    bias = 0.0
    step = 1.0
    loss, grad_w, grad_b = nll_and_gradient(weights, bias, x, y, config.l2)
    for _ in range(config.max_epochs):
        gnorm2 = float(grad_w @ grad_w) + grad_b * grad_b
        if gnorm2 ** 0.5 < config.gradient_tolerance:
            break
        # backtracking line search on the Armijo condition
        step = min(step * 2.0, 1e6)
        while True:
            new_w = weights - step * grad_w
            new_b = bias - step * grad_b
            new_loss, new_gw, new_gb = nll_and_gradient(new_w, new_b, x, y,
                                                        config.l2)
            if new_loss <= loss - 0.5 * step * gnorm2 or step < 1e-12:
                break
            step *= 0.5
        weights, bias = new_w, new_b
        loss, grad_w, grad_b = new_loss, new_gw, new_gb
    return LinearModel(kind, vocab, weights, bias, config.threshold)


# ---------------------------------------------------------------------------
# Model files: self-describing JSON


def save_model(model: RelationModel, path) -> None:
    if isinstance(model, BasicModel):
        doc = {"kind": BASIC, "positives": sorted(model.positives)}
    elif isinstance(model, NetModel):
        doc = {
            "kind": NET,
            "fractions": dict(sorted(model.fractions.items())),
            "edges": sorted(list(e) for e in model.edges),
            "starts": sorted(model.starts),
            "accepts": sorted(model.accepts),
        }
    else:
        doc = {
            "kind": model.kind,
            "vocabulary": model.vocabulary,
            "weights": [float(w) for w in model.weights],
            "bias": model.bias,
            "threshold": model.threshold,
        }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=1, sort_keys=True)
        fh.write("\n")


def load_model(path) -> RelationModel:
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    kind = doc["kind"]
    if kind == BASIC:
        return BasicModel(frozenset(doc["positives"]))
    if kind == NET:
        return NetModel({k: float(v) for k, v in doc["fractions"].items()},
                        frozenset(tuple(e) for e in doc["edges"]),
                        frozenset(doc["starts"]), frozenset(doc["accepts"]))
    if kind in (LR, LRC, LRCL):
        return LinearModel(kind, doc["vocabulary"],
                           np.asarray(doc["weights"], dtype=float),
                           float(doc["bias"]), float(doc["threshold"]))
    raise ValueError(f"unknown model kind {kind!r} in {path}")
