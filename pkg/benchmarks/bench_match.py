#!/usr/bin/env python3
"""Benchmark the compiled match kernel against the pure-Python fallback.

Two workloads: raw pattern matching over synthetic sentences with ambiguous
patterns (kernel-dominated), and full corpus parsing with the bundled final
grammar (end to end). Run from the repository root:

    python3 benchmarks/bench_match.py [--repeat N]
"""

from __future__ import annotations

import argparse
import importlib
import os
import statistics
import sys
import time

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from semgram.corpus import Token, load_corpus, make_sentence
from semgram.grammar import Symbol, load_grammar
from semgram.parsing import _matchpure
from semgram.parsing.match import SentenceIndex, match
from semgram.parsing.parser import parse_corpus

match_mod = importlib.import_module("semgram.parsing.match")

try:
    from semgram.parsing import _matchcore
except ImportError:
    _matchcore = None

DATA = os.path.join(os.path.dirname(__file__), "..", "data")


def synthetic_sentences(n=40, length=18):
    sentences = []
    for k in range(n):
        words = [f"w{(i * 7 + k) % 9}" for i in range(length)]
        classes = []
        pos = 0
        while pos < length:
            width = 1 + (pos + k) % 2
            width = min(width, length - pos)
            value = f"K{(pos + k) % 4}" if (pos + k) % 3 else None
            classes.append(Token(value, "class", pos, pos + width))
            pos += width
        sentences.append(make_sentence(f"b{k}", words, {"class": classes}))
    return sentences


def bench_raw(kernel, sentences, repeat):
    patterns = [
        (Symbol.nt("A"), Symbol.term("w3"), Symbol.nt("B")),
        (Symbol.term("K1", "class"), Symbol.nt("A")),
        (Symbol.nt("A"), Symbol.nt("B")),
        (Symbol.nt("A"), Symbol.term("w1"), Symbol.nt("B"),
         Symbol.term("w5"), Symbol.nt("C")),
    ]
    match_mod._kernel = kernel
    times = []
    matches = 0
    for _ in range(repeat):
        t0 = time.perf_counter()
        for sent in sentences:
            index = SentenceIndex(sent)
            term = sent.whole_term()
            for pattern in patterns:
                matches += len(match(pattern, term, sent, index=index))
        times.append(time.perf_counter() - t0)
    return min(times), matches


def bench_parse(kernel, sentences, grammar, repeat):
    match_mod._kernel = kernel
    snapshot = grammar.snapshot()
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        outcomes = parse_corpus(sentences, grammar.start_symbol, snapshot)
        times.append(time.perf_counter() - t0)
    ops = sum(o.tree.operations for o in outcomes)
    return min(times), ops


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()

    if _matchcore is None:
        print("compiled kernel not built; run pip install -e . first")
        return 1

    synth = synthetic_sentences()
    corpus = load_corpus(os.path.join(DATA, "corpus.jsonl"))
    grammar = load_grammar(os.path.join(DATA, "final_grammar.txt"))
    original = match_mod._kernel
    try:
        rows = []
        for name, kernel in (("python", _matchpure), ("cython", _matchcore)):
            raw, matches = bench_raw(kernel, synth, args.repeat)
            whole, ops = bench_parse(kernel, corpus, grammar, args.repeat)
            rows.append((name, raw, whole))
        print(f"{'kernel':<8} {'raw match':>12} {'corpus parse':>14}")
        for name, raw, whole in rows:
            print(f"{name:<8} {raw * 1000:>10.1f}ms {whole * 1000:>12.1f}ms")
        py, cy = rows[0], rows[1]
        print(f"\nspeedup: raw x{py[1] / cy[1]:.1f}, parse x{py[2] / cy[2]:.1f}"
              f"  ({len(corpus)} sentences, {ops} parse operations)")
    finally:
        match_mod._kernel = original
    return 0


if __name__ == "__main__":
    sys.exit(main())
