"""Relation learning and prediction over semantic trees."""

from .trees import (
    DEFAULT_KIND_LAYERS, ConversionFailure, Located, RelationExample,
    VariableNode, VariableTree, extract_variable_tree, locate_entity_nodes,
    render_date,
)
from .models import (
    BASIC, KINDS, LR, LRC, LRCL, NET, BasicModel, LinearModel, NetModel,
    RelationModel, TrainConfig, load_model, nll_and_gradient, save_model,
    train,
)
from .evaluate import (
    ConversionStats, CrossValidationReport, EvalResult, convert_examples,
    crossvalidate, evaluate, predict, sample_negatives,
)

__all__ = [name for name in dir() if not name.startswith("_")]


def load_relations(path) -> list[RelationExample]:
    """Read 'predicate <TAB> sentence-id <TAB> object <TAB> kind' lines."""
    out = []
    with open(path, encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n")
            if not line.strip() or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 4:
                raise ValueError(
                    f"{path}:{line_no}: expected 4 tab-separated fields")
            predicate, subject, obj, kind = parts
            out.append(RelationExample(predicate, ((obj, kind),), subject))
    return out


def save_relations(examples, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for ex in examples:
            for value, kind in ex.arguments:
                fh.write(f"{ex.predicate}\t{ex.sentence_id}\t{value}\t{kind}\n")
