"""Pattern matching of rule right-hand sides against layered sentences.

A rhs is treated like a regular expression over the term: non-terminals are
``+`` wildcards matching at least one word, terminals are literals matched
against their own layer (a terminal can only match a whole token, so a
multi-word annotation is never broken apart). All ambiguous matches are
enumerated.

Patterns with no terminal at all are the most ambiguous, so they are
restricted: at most ``max_plain_nonterminals`` symbols, and the first
non-terminal's term is capped at ``max_first_span`` words. Both limits are
configurable and apply only to terminal-free patterns; the span cap only
kicks in when the pattern has two or more non-terminals, since a single
wildcard admits exactly one (unambiguous) match over the whole term.

The span enumeration itself runs in a kernel selected at import time: the
compiled extension when built, otherwise the pure-Python twin. Set
``SEMGRAM_PURE_PYTHON=1`` to force the fallback.
"""

from __future__ import annotations

import os
from array import array
from dataclasses import dataclass
from typing import Optional, Sequence

from ..corpus import LayeredSentence, Term
from ..grammar import Symbol

if os.environ.get("SEMGRAM_PURE_PYTHON"):
    from . import _matchpure as _kernel
else:
    try:
        from . import _matchcore as _kernel  # type: ignore[no-redef]
    except ImportError:
        from . import _matchpure as _kernel  # type: ignore[no-redef]

KERNEL_NAME: str = _kernel.KERNEL_NAME


@dataclass(frozen=True)
class MatchLimits:
    """Ambiguity limits for terminal-free patterns."""

    max_plain_nonterminals: int = 2
    max_first_span: int = 3


DEFAULT_LIMITS = MatchLimits()


class SentenceIndex:
    """Per-sentence arrays the kernels consume; built lazily per layer.

    Prepared pattern arrays are cached per rhs tuple, since a parse run
    matches the same rule patterns against many spans of one sentence.
    """

    def __init__(self, sentence: LayeredSentence):
        self.sentence = sentence
        self._layers: dict[str, Optional[tuple]] = {}
        self._patterns: dict[int, tuple] = {}

    def layer(self, name: str) -> Optional[tuple]:
        """(pos_tok, starts, ends, vals, value_ids) or None if absent."""
        if name in self._layers:
            return self._layers[name]
        toks = self.sentence.layers.get(name)
        if toks is None:
            self._layers[name] = None
            return None
        value_ids: dict[str, int] = {}
        vals = array("i")
        starts = array("i")
        ends = array("i")
        pos_tok = array("i")
        for row, tok in enumerate(toks):
            if tok.value is None:
                vals.append(-1)
            else:
                vals.append(value_ids.setdefault(tok.value, len(value_ids)))
            starts.append(tok.start)
            ends.append(tok.end)
            pos_tok.extend([row] * (tok.end - tok.start))
        entry = (pos_tok, starts, ends, vals, value_ids)
        self._layers[name] = entry
        return entry


def _prepare(pattern: Sequence[Symbol], index: SentenceIndex,
             limits: MatchLimits) -> Optional[tuple]:
    """Kernel arrays for one pattern against one sentence, or None when the
    pattern cannot match anywhere in it."""
    n = len(pattern)
    kinds = array("i", [0] * n)
    layer_idxs = array("i", [0] * n)
    val_ids = array("i", [0] * n)
    layer_slots: dict[str, int] = {}
    pos_toks: list[array] = []
    tok_starts: list[array] = []
    tok_ends: list[array] = []
    tok_vals: list[array] = []
    n_wildcards = 0
    first_wc = -1
    for i, sym in enumerate(pattern):
        if sym.is_terminal:
            kinds[i] = 1
            slot = layer_slots.get(sym.layer)
            if slot is None:
                entry = index.layer(sym.layer)
                if entry is None:
                    return None  # sentence lacks the layer
                slot = len(pos_toks)
                layer_slots[sym.layer] = slot
                pos_toks.append(entry[0])
                tok_starts.append(entry[1])
                tok_ends.append(entry[2])
                tok_vals.append(entry[3])
            layer_idxs[i] = slot
            vid = _layer_value_id(index, sym.layer, sym.value)
            if vid < 0:
                return None  # value absent from the layer in this sentence
            val_ids[i] = vid
        else:
            if first_wc < 0:
                first_wc = i
            n_wildcards += 1
    first_cap = 0
    if not layer_slots:  # terminal-free pattern
        if n_wildcards > limits.max_plain_nonterminals:
            return None
        if n_wildcards >= 2:
            first_cap = limits.max_first_span
    return (kinds, layer_idxs, val_ids, pos_toks, tok_starts, tok_ends,
            tok_vals, first_wc, first_cap)


def match(pattern: Sequence[Symbol], term: Term, sentence: LayeredSentence,
          limits: MatchLimits = DEFAULT_LIMITS,
          index: Optional[SentenceIndex] = None) -> list[list[Term]]:
    """All ways `pattern` can cover `term`, as lists of sub-terms.

    Each returned list holds one term per non-terminal (or universal) symbol
    of the pattern, in order; a pure-terminal match yields one empty list.
    No match yields an empty result, never an error.
    """
    if index is None:
        index = SentenceIndex(sentence)
    # identity-keyed cache: rule rhs tuples are immutable and live as long
    # as the grammar snapshot; holding the reference keeps ids stable
    cached = index._patterns.get(id(pattern))
    if cached is not None and cached[0] is pattern and cached[1] == limits:
        prepared = cached[2]
    else:
        prepared = _prepare(pattern, index, limits)
        if isinstance(pattern, tuple):
            index._patterns[id(pattern)] = (pattern, limits, prepared)
    if prepared is None:
        return []
    (kinds, layer_idxs, val_ids, pos_toks, tok_starts, tok_ends, tok_vals,
     first_wc, first_cap) = prepared
    raw = _kernel.enumerate_matches(
        kinds, layer_idxs, val_ids, pos_toks, tok_starts, tok_ends, tok_vals,
        term.start, term.end, first_wc, first_cap)
    sid = sentence.id
    return [
        [Term(sid, flat[k], flat[k + 1]) for k in range(0, len(flat), 2)]
        for flat in raw
    ]


def _layer_value_id(index: SentenceIndex, layer: str, value: str) -> int:
    entry = index.layer(layer)
    if entry is None:
        return -1
    return entry[4].get(value, -1)
