"""Layered sentence corpus: the input representation everything else consumes.

A sentence is stored as parallel annotation layers. The lexical layer has
one token per word; every other layer tiles the word range with possibly
multi-word tokens, using explicit null tokens for unannotated gaps. A term
is a contiguous word span; interpreting a term in a layer yields the tokens
it covers, or an invalid marker when a span boundary cuts a token in half.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Sequence

LEXICAL = "lexical"


class CorpusError(Exception):
    """Malformed corpus input. Carries sentence id / line number when known."""

    def __init__(self, message: str, sentence_id: str | None = None,
                 line: int | None = None):
        where = []
        if line is not None:
            where.append(f"line {line}")
        if sentence_id is not None:
            where.append(f"sentence {sentence_id!r}")
        if where:
            message = f"{message} ({', '.join(where)})"
        super().__init__(message)
        self.sentence_id = sentence_id
        self.line = line


class UnknownLayerError(KeyError):
    pass


@dataclass(frozen=True)
class Token:
    """One annotation in a layer, spanning words [start, end)."""

    value: Optional[str]  # None marks a null token
    layer: str
    start: int
    end: int

    @property
    def is_null(self) -> bool:
        return self.value is None

    def __len__(self) -> int:
        return self.end - self.start


@dataclass(frozen=True)
class Term:
    """A contiguous word span [start, end) of one sentence."""

    sentence_id: str
    start: int
    end: int

    def __len__(self) -> int:
        return self.end - self.start

    @property
    def span(self) -> tuple[int, int]:
        return (self.start, self.end)


@dataclass(frozen=True)
class TermInterpretation:
    """A term read in one layer: the covered tokens, or invalid."""

    term: Term
    layer: str
    tokens: Optional[tuple[Token, ...]]  # None when a token is broken

    @property
    def valid(self) -> bool:
        return self.tokens is not None

    def non_null_tokens(self) -> tuple[Token, ...]:
        if self.tokens is None:
            return ()
        return tuple(t for t in self.tokens if not t.is_null)


@dataclass(frozen=True)
class LayeredSentence:
    """An immutable sentence with its annotation layers.

    Layers always include the lexical layer (one non-null token per word).
    Within a layer, tokens are sorted, non-overlapping and tile [0, length)
    with explicit null tokens; ``token_at`` is O(1) via a position index.
    """

    id: str
    words: tuple[str, ...]
    layers: Mapping[str, tuple[Token, ...]]
    _pos_index: Mapping[str, tuple[int, ...]] = field(
        repr=False, hash=False, compare=False, default_factory=dict)

    @property
    def length(self) -> int:
        return len(self.words)

    def __len__(self) -> int:
        return len(self.words)

    def layer_names(self) -> tuple[str, ...]:
        return tuple(self.layers)

    def tokens(self, layer: str) -> tuple[Token, ...]:
        try:
            return self.layers[layer]
        except KeyError:
            raise UnknownLayerError(
                f"sentence {self.id!r} has no layer {layer!r}") from None

    def token_at(self, layer: str, pos: int) -> Token:
        """The token of `layer` covering word position `pos`."""
        idx = self._pos_index[layer] if layer in self._pos_index else None
        toks = self.tokens(layer)
        if idx is not None:
            return toks[idx[pos]]
        for tok in toks:  # pragma: no cover - index always built by make_sentence
            if tok.start <= pos < tok.end:
                return tok
        raise IndexError(pos)

    def whole_term(self) -> Term:
        return Term(self.id, 0, self.length)


def make_sentence(sentence_id: str, words: Sequence[str],
                  layers: Mapping[str, Sequence[Token]]) -> LayeredSentence:
    """Build and validate a LayeredSentence.

    `layers` must not contain the lexical layer; it is derived from `words`.
    Raises CorpusError on tiling/ordering violations.
    """
    words = tuple(words)
    n = len(words)
    built: dict[str, tuple[Token, ...]] = {
        LEXICAL: tuple(Token(w, LEXICAL, i, i + 1) for i, w in enumerate(words))
    }
    if LEXICAL in layers:
        raise CorpusError("lexical layer is implicit and may not be redefined",
                          sentence_id=sentence_id)
    for name, toks in layers.items():
        built[name] = tuple(toks)
    pos_index: dict[str, tuple[int, ...]] = {}
    for name, toks in built.items():
        expect = 0
        index: list[int] = []
        for i, tok in enumerate(toks):
            if tok.layer != name:
                raise CorpusError(
                    f"token {tok} filed under layer {name!r}",
                    sentence_id=sentence_id)
            if not (0 <= tok.start < tok.end <= n):
                raise CorpusError(
                    f"token span [{tok.start}, {tok.end}) out of range "
                    f"for {n}-word sentence in layer {name!r}",
                    sentence_id=sentence_id)
            if tok.start != expect:
                kind = "overlapping" if tok.start < expect else "gap before"
                raise CorpusError(
                    f"{kind} token at position {tok.start} in layer {name!r} "
                    "(layers must tile the sentence; use null tokens)",
                    sentence_id=sentence_id)
            if name == LEXICAL and tok.is_null:
                raise CorpusError("null token in lexical layer",
                                  sentence_id=sentence_id)
            index.extend([i] * len(tok))
            expect = tok.end
        if expect != n:
            raise CorpusError(
                f"layer {name!r} tiles only [0, {expect}) of a {n}-word "
                "sentence", sentence_id=sentence_id)
        pos_index[name] = tuple(index)
    return LayeredSentence(sentence_id, words, built, pos_index)


def interpret(sentence: LayeredSentence, term: Term, layer: str) -> TermInterpretation:
    """Read `term` in `layer`.

    Returns the covered token subsequence, or an invalid interpretation when
    the span boundary breaks a token of the layer.
    """
    if not (0 <= term.start < term.end <= sentence.length):
        raise ValueError(f"term {term} out of bounds for sentence {sentence.id!r}")
    toks = sentence.tokens(layer)  # raises UnknownLayerError
    index = sentence._pos_index[layer]
    i, j = index[term.start], index[term.end - 1]
    if toks[i].start != term.start or toks[j].end != term.end:
        return TermInterpretation(term, layer, None)
    return TermInterpretation(term, layer, toks[i:j + 1])


def lexical_text(sentence: LayeredSentence, term: Term) -> str:
    """The term's words joined with spaces."""
    return " ".join(sentence.words[term.start:term.end])


# ---------------------------------------------------------------------------
# File format: JSON Lines, one sentence per line.
#   {"id": str, "words": [str], "layers": {name: [{"v": str|null, "s": int, "e": int}]}}
# The lexical layer is implicit from "words".

def _sentence_from_record(rec: dict, line: int) -> LayeredSentence:
    try:
        sid = rec["id"]
        words = rec["words"]
        raw_layers = rec.get("layers", {})
    except (KeyError, TypeError) as exc:
        raise CorpusError(f"missing field {exc}", line=line) from None
    if not isinstance(sid, str) or not isinstance(words, list):
        raise CorpusError("'id' must be a string and 'words' a list", line=line)
    layers: dict[str, list[Token]] = {}
    for name, toks in raw_layers.items():
        try:
            layers[name] = [
                Token(t["v"], name, int(t["s"]), int(t["e"])) for t in toks
            ]
        except (KeyError, TypeError, ValueError):
            raise CorpusError(
                f"malformed token record in layer {name!r}",
                sentence_id=sid, line=line) from None
    try:
        return make_sentence(sid, words, layers)
    except CorpusError as exc:
        raise CorpusError(str(exc.args[0]) if exc.args else "invalid sentence",
                          sentence_id=sid, line=line) from None


def load_corpus(path) -> list[LayeredSentence]:
    """Load a JSON-Lines corpus file. Malformed records name their line."""
    sentences = []
    seen: set[str] = set()
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusError(f"invalid JSON: {exc.msg}", line=line_no) from None
            sent = _sentence_from_record(rec, line_no)
            if sent.id in seen:
                raise CorpusError("duplicate sentence id",
                                  sentence_id=sent.id, line=line_no)
            seen.add(sent.id)
            sentences.append(sent)
    return sentences


def _sentence_to_record(sentence: LayeredSentence) -> dict:
    layers = {
        name: [{"v": t.value, "s": t.start, "e": t.end} for t in toks]
        for name, toks in sorted(sentence.layers.items())
        if name != LEXICAL
    }
    return {"id": sentence.id, "words": list(sentence.words), "layers": layers}


def save_corpus(sentences: Iterable[LayeredSentence], path) -> None:
    """Write the canonical form: one compact JSON record per line, layers
    sorted by name. load(save(c)) == c and save(load(f)) is byte-identical
    for canonical input files."""
    with open(path, "w", encoding="utf-8") as fh:
        for sent in sentences:
            fh.write(json.dumps(_sentence_to_record(sent), ensure_ascii=False,
                                separators=(",", ":")))
            fh.write("\n")
