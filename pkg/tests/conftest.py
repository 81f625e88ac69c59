import os

import pytest

from semgram.corpus import Token, load_corpus, make_sentence
from semgram.grammar import Grammar, Symbol, load_grammar

DATA_DIR = os.path.join(os.path.dirname(__file__), "..", "data")


def data_path(name: str) -> str:
    return os.path.join(DATA_DIR, name)


@pytest.fixture(scope="session")
def corpus():
    return load_corpus(data_path("corpus.jsonl"))


@pytest.fixture(scope="session")
def corpus_by_id(corpus):
    return {s.id: s for s in corpus}


@pytest.fixture(scope="session")
def seed_grammar():
    return load_grammar(data_path("seed_grammar.txt"))


@pytest.fixture(scope="session")
def final_grammar():
    return load_grammar(data_path("final_grammar.txt"))


def reference_sentence():
    """The seven-word example sentence with its five annotation layers."""
    words = "Phil Madeira is a musician from Nashville".split()
    def nulls(layer, spans):
        toks = []
        pos = 0
        for start, end, value in spans:
            toks.extend(Token(None, layer, i, i + 1) for i in range(pos, start))
            toks.append(Token(value, layer, start, end))
            pos = end
        toks.extend(Token(None, layer, i, i + 1) for i in range(pos, len(words)))
        return toks
    layers = {
        "small-caps": [Token(w.lower(), "small-caps", i, i + 1)
                       for i, w in enumerate(words)],
        "named-entity": nulls("named-entity", [(0, 2, "Person"), (6, 7, "Location")]),
        "instance": nulls("instance", [(0, 2, "Phil_Madeira"),
                                       (4, 5, "Musical_Artist"),
                                       (6, 7, "Nashville_Tennessee")]),
        "class": nulls("class", [(0, 2, "Person"), (4, 5, "Profession"),
                                 (6, 7, "Location")]),
    }
    return make_sentence("ref", words, layers)


@pytest.fixture
def ref_sentence():
    return reference_sentence()


@pytest.fixture
def small_grammar():
    """Covers the reference sentence completely."""
    g = Grammar("Relation")
    nt, t, u = Symbol.nt, Symbol.term, Symbol.universal
    g.add_rule(nt("Relation"), [nt("Person"), t("is"), nt("Life Role")])
    g.add_rule(nt("Person"), [t("Person", "class")])
    g.add_rule(nt("Location"), [t("Location", "class")])
    g.add_rule(nt("Profession"), [t("Profession", "class")])
    g.add_rule(u(), [t("a"), u()])
    g.add_rule(nt("Life Role"), [nt("Profession"), t("from"), nt("Location")])
    return g
