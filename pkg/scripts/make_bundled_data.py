#!/usr/bin/env python3
"""Generate the bundled synthetic corpus, seed grammar and relation dataset.

Everything is derived from a fixed seed, so re-running this script must
reproduce data/corpus.jsonl, data/seed_grammar.txt and data/relations.tsv
byte for byte. The corpus imitates encyclopedia first sentences about
people, annotated on five layers (lexical, small-caps, named-entity,
instance, class), with deliberate blind spots the induction session has to
fill and a few long-tail phrases for instance mining.
"""

from __future__ import annotations

import os
import random
import sys

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from semgram.corpus import Token, make_sentence, save_corpus
from semgram.grammar import Grammar, Symbol, save_grammar
from semgram.relext import RelationExample, save_relations

SEED = 2015  # fixed dataset seed

FIRST = ["Phil", "Anna", "Marco", "Lena", "Tomas", "Greta", "Ivan", "Clara",
         "Hugo", "Mira", "Stefan", "Nora", "Pavel", "Edith", "Oskar", "Tanja"]
LAST = ["Madeira", "Kovac", "Lindt", "Baros", "Falk", "Horvat", "Szabo",
        "Weiss", "Novak", "Berger", "Holst", "Varga", "Petran", "Sorel",
        "Ryba", "Hallen"]

MUSIC_PROFS = ["musician", "guitarist", "singer", "drummer", "pianist"]
PLAIN_PROFS = ["teacher", "professor", "physicist", "chemist", "journalist",
               "novelist", "painter"]
HOBBY_PROFS = ["promoter", "manager", "agent", "dealer", "curator"]
VOWEL_PROFS = ["engineer", "artist", "architect"]
ALL_PROFS = MUSIC_PROFS + PLAIN_PROFS + HOBBY_PROFS + VOWEL_PROFS

CITIES = {
    "Nashville": "Nashville_Tennessee", "Boston": "Boston_Massachusetts",
    "Chicago": "Chicago_Illinois", "Memphis": "Memphis_Tennessee",
    "Austin": "Austin_Texas", "Denver": "Denver_Colorado",
    "Portland": "Portland_Oregon", "Seattle": "Seattle_Washington",
    "Tucson": "Tucson_Arizona", "Omaha": "Omaha_Nebraska",
}
NATIONALITIES = {
    "british": "British_people", "french": "French_people",
    "german": "German_people", "american": "American_people",
    "italian": "Italian_people", "spanish": "Spanish_people",
}
ORGS = ["Acme Corp", "Globex Inc", "Initech Labs", "Umbra Studios",
        "Vertex Group", "Nimbus Press", "Corusca Films", "Helix Institute"]
MUSIC_INTERESTS = {"jazz": "Jazz_music", "blues": "Blues_music",
                   "soul": "Soul_music"}
HOBBY_INTERESTS = {"golf": "Golf_sport", "chess": "Chess_game",
                   "sailing": "Sailing_sport"}
THINGS = [("cosmic rays", 4), ("radio waves", 3), ("x rays", 2)]
AWARDS = [("Grammy Award", "Grammy_Award", 4),
          ("Pulitzer Prize", "Pulitzer_Prize", 3),
          ("Turner Prize", "Turner_Prize", 2)]
ISO_DATES = ["1883-06-24", "1902-03-11", "1915-09-30", "1921-01-07",
             "1907-12-19", "1931-05-02"]
MONTHS = ["January", "February", "March", "April", "May", "June", "July",
          "August", "September", "October", "November", "December"]


def date_words(iso: str) -> list[str]:
    year, month, day = iso.split("-")
    return [str(int(day)), MONTHS[int(month) - 1], year]


class Builder:
    """Collects a sentence's words plus span annotations layer by layer."""

    def __init__(self):
        self.words: list[str] = []
        self.ann: list[tuple[str, int, int, str]] = []  # layer, start, end, value

    def add(self, text: str, ne=None, instance=None, cls=None) -> tuple[int, int]:
        start = len(self.words)
        self.words.extend(text.split())
        end = len(self.words)
        if ne:
            self.ann.append(("named-entity", start, end, ne))
        if instance:
            self.ann.append(("instance", start, end, instance))
        if cls:
            self.ann.append(("class", start, end, cls))
        return start, end

    def sentence(self, sid: str):
        n = len(self.words)
        layers: dict[str, list[Token]] = {
            "small-caps": [Token(w.lower(), "small-caps", i, i + 1)
                           for i, w in enumerate(self.words)],
        }
        for name in ("named-entity", "instance", "class"):
            spans = sorted((s, e, v) for (lay, s, e, v) in self.ann
                           if lay == name)
            toks: list[Token] = []
            pos = 0
            for s, e, v in spans:
                for i in range(pos, s):
                    toks.append(Token(None, name, i, i + 1))
                toks.append(Token(v, name, s, e))
                pos = e
            for i in range(pos, n):
                toks.append(Token(None, name, i, i + 1))
            layers[name] = toks
        return make_sentence(sid, self.words, layers)


def prof_instance(word: str) -> str:
    return word[:1].upper() + word[1:]


class World:
    def __init__(self):
        self.rng = random.Random(SEED)
        self.sentences = []
        self.relations: list[RelationExample] = []
        names = [(f, l) for f in FIRST for l in LAST]
        self.rng.shuffle(names)
        self.names = iter(names)
        self.counter = 0

    def next_id(self) -> str:
        sid = f"s{self.counter:03d}"
        self.counter += 1
        return sid

    def rel(self, sid: str, predicate: str, value: str, kind: str) -> None:
        self.relations.append(RelationExample(predicate, ((value, kind),), sid))

    def person(self, builder: Builder, name=None) -> str:
        first, last = name or next(self.names)
        builder.add(f"{first} {last}", ne="Person",
                    instance=f"{first}_{last}", cls="Person")
        return last

    def profession(self, builder: Builder, word: str) -> str:
        builder.add(word, instance=prof_instance(word), cls="Profession")
        return prof_instance(word)

    def city(self, builder: Builder, word: str) -> str:
        builder.add(word, ne="Location", instance=CITIES[word], cls="Location")
        return CITIES[word]


def build(world: World, kind: str, **kw):
    b = Builder()
    rng = world.rng
    sid = world.next_id()
    if kind == "is-from":            # N is a P from C
        last = world.person(b, kw.get("name"))
        b.add("is")
        b.add("a")
        prof = world.profession(b, kw["prof"])
        b.add("from")
        fr_start = len(b.words) - 1
        city = world.city(b, kw["city"])
        world.rel(sid, "occupation", prof, "resource")
        world.rel(sid, "hometown", city, "resource")
        world.rel(sid, "highlight", city, "resource")
        if kw.get("surname"):
            world.rel(sid, "surname", last, "string")
    elif kind == "is-nat":           # N is a NAT P
        last = world.person(b)
        b.add("is")
        b.add("a")
        b.add(kw["nat"], cls="Nationality", instance=NATIONALITIES[kw["nat"]])
        prof = world.profession(b, kw["prof"])
        world.rel(sid, "occupation", prof, "resource")
        if kw.get("surname"):
            world.rel(sid, "surname", last, "string")
    elif kind == "was-from":         # N was a P from C
        world.person(b)
        b.add("was")
        b.add("a")
        prof = world.profession(b, kw["prof"])
        b.add("from")
        city_word = kw["city"]
        city = world.city(b, city_word)
        world.rel(sid, "occupation", prof, "resource")
        world.rel(sid, "hometown", city, "resource")
        if kw.get("fromphrase"):
            world.rel(sid, "fromPhrase", f"from {city_word}", "string")
    elif kind == "is-the-of":        # N is the P of ORG
        world.person(b)
        b.add("is")
        b.add("the")
        prof = world.profession(b, kw["prof"])
        b.add("of")
        org = kw["org"]
        b.add(org, instance=org.replace(" ", "_"), cls="Organization")
        world.rel(sid, "occupation", prof, "resource")
        world.rel(sid, "employer", org.replace(" ", "_"), "resource")
    elif kind == "and-from":         # N is a P1 and P2 from C
        world.person(b)
        b.add("is")
        b.add("a")
        p1 = world.profession(b, kw["p1"])
        b.add("and")
        p2 = world.profession(b, kw["p2"])
        b.add("from")
        city = world.city(b, kw["city"])
        world.rel(sid, "occupation", p1, "resource")
        world.rel(sid, "occupation", p2, "resource")
        world.rel(sid, "hometown", city, "resource")
    elif kind == "born-paren":       # N ( born Y ) is a P from C
        world.person(b)
        b.add("(")
        b.add("born")
        b.add(kw["year"], cls="Number")
        b.add(")")
        b.add("is")
        b.add("a")
        prof = world.profession(b, kw["prof"])
        b.add("from")
        city = world.city(b, kw["city"])
        world.rel(sid, "occupation", prof, "resource")
        world.rel(sid, "hometown", city, "resource")
        world.rel(sid, "birthYear", kw["year"], "date")
        world.rel(sid, "highlight", kw["year"], "date")
    elif kind == "who-loves":        # N is a P who loves I
        world.person(b)
        b.add("is")
        b.add("a")
        prof = world.profession(b, kw["prof"])
        b.add("who")
        b.add("loves")
        interest = kw["interest"]
        inst = (MUSIC_INTERESTS | HOBBY_INTERESTS)[interest]
        b.add(interest, cls="Interest", instance=inst)
        world.rel(sid, "occupation", prof, "resource")
        if interest in MUSIC_INTERESTS:
            world.rel(sid, "passion", interest, "string")
        else:
            world.rel(sid, "passion", prof, "resource")
    elif kind == "who-discovered":   # N is a P who discovered T
        world.person(b)
        b.add("is")
        b.add("a")
        prof = world.profession(b, kw["prof"])
        b.add("who")
        b.add("discovered")
        b.add(kw["thing"])
        world.rel(sid, "occupation", prof, "resource")
    elif kind == "univ":             # N is a P from the university
        world.person(b)
        b.add("is")
        b.add("a")
        prof = world.profession(b, kw["prof"])
        b.add("from")
        b.add("the")
        b.add("university")
        world.rel(sid, "occupation", prof, "resource")
    elif kind == "was-nat-period":   # N was a NAT P .
        world.person(b)
        b.add("was")
        b.add("a")
        b.add(kw["nat"], cls="Nationality", instance=NATIONALITIES[kw["nat"]])
        prof = world.profession(b, kw["prof"])
        b.add(".")
        world.rel(sid, "occupation", prof, "resource")
    elif kind == "born-date":        # N is a P born D M Y
        world.person(b)
        b.add("is")
        b.add("a")
        prof = world.profession(b, kw["prof"])
        b.add("born")
        b.add(" ".join(date_words(kw["iso"])), cls="Date")
        world.rel(sid, "occupation", prof, "resource")
        world.rel(sid, "birthDate", kw["iso"], "date")
    elif kind == "plain":            # N is a P
        world.person(b)
        b.add("is")
        b.add("a")
        prof = world.profession(b, kw["prof"])
        world.rel(sid, "occupation", prof, "resource")
    elif kind == "an-from":          # N is an P from C
        world.person(b)
        b.add("is")
        b.add("an")
        prof = world.profession(b, kw["prof"])
        b.add("from")
        city = world.city(b, kw["city"])
        world.rel(sid, "occupation", prof, "resource")
        world.rel(sid, "hometown", city, "resource")
    elif kind == "list-from":        # N is a P1 , P2 and P3 from C
        world.person(b)
        b.add("is")
        b.add("a")
        p1 = world.profession(b, kw["p1"])
        b.add(",")
        p2 = world.profession(b, kw["p2"])
        b.add("and")
        p3 = world.profession(b, kw["p3"])
        b.add("from")
        city = world.city(b, kw["city"])
        for p in (p1, p2, p3):
            world.rel(sid, "occupation", p, "resource")
        world.rel(sid, "hometown", city, "resource")
    elif kind == "born-year":        # N is a P born Y
        world.person(b)
        b.add("is")
        b.add("a")
        prof = world.profession(b, kw["prof"])
        b.add("born")
        b.add(kw["year"], cls="Number")
        world.rel(sid, "occupation", prof, "resource")
        world.rel(sid, "birthYear", kw["year"], "date")
    elif kind == "was-plain":        # N was a P
        world.person(b)
        b.add("was")
        b.add("a")
        prof = world.profession(b, kw["prof"])
        world.rel(sid, "occupation", prof, "resource")
    elif kind == "is-and":           # N is a P1 and P2
        world.person(b)
        b.add("is")
        b.add("a")
        p1 = world.profession(b, kw["p1"])
        b.add("and")
        p2 = world.profession(b, kw["p2"])
        world.rel(sid, "occupation", p1, "resource")
        world.rel(sid, "occupation", p2, "resource")
    elif kind == "was-who-loves":    # N was a P who loves I
        world.person(b)
        b.add("was")
        b.add("a")
        prof = world.profession(b, kw["prof"])
        b.add("who")
        b.add("loves")
        interest = kw["interest"]
        inst = (MUSIC_INTERESTS | HOBBY_INTERESTS)[interest]
        b.add(interest, cls="Interest", instance=inst)
        world.rel(sid, "occupation", prof, "resource")
    elif kind == "was-born-date":    # N was a P born D M Y
        world.person(b)
        b.add("was")
        b.add("a")
        prof = world.profession(b, kw["prof"])
        b.add("born")
        b.add(" ".join(date_words(kw["iso"])), cls="Date")
        world.rel(sid, "occupation", prof, "resource")
        world.rel(sid, "birthDate", kw["iso"], "date")
    elif kind == "was-the-of":       # N was the P of ORG
        world.person(b)
        b.add("was")
        b.add("the")
        prof = world.profession(b, kw["prof"])
        b.add("of")
        org = kw["org"]
        b.add(org, instance=org.replace(" ", "_"), cls="Organization")
        world.rel(sid, "occupation", prof, "resource")
        world.rel(sid, "employer", org.replace(" ", "_"), "resource")
    elif kind == "won":              # N won AWARD
        world.person(b)
        b.add("won")
        label, inst, _ = kw["award"]
        b.add(label, instance=inst, cls="Award")
    else:
        raise ValueError(kind)
    world.sentences.append(b.sentence(sid))


def pick(rng, pool, forbid=()):
    choice = rng.choice(pool)
    while choice in forbid:
        choice = rng.choice(pool)
    return choice


def generate_corpus(world: World) -> None:
    rng = world.rng
    cities = list(CITIES)
    nats = list(NATIONALITIES)

    # the reference sentence comes first, with its canonical annotations
    build(world, "is-from", name=("Phil", "Madeira"), prof="musician",
          city="Nashville")

    for i in range(45):
        build(world, "is-from", prof=pick(rng, MUSIC_PROFS + PLAIN_PROFS),
              city=pick(rng, cities), surname=(i < 15))
    for _ in range(2):
        build(world, "is-nat", nat=pick(rng, nats),
              prof=pick(rng, MUSIC_PROFS + PLAIN_PROFS))
    for i in range(20):
        build(world, "was-from", prof=pick(rng, PLAIN_PROFS),
              city=pick(rng, cities), fromphrase=(i < 10))
    for _ in range(14):
        build(world, "is-the-of", prof=pick(rng, HOBBY_PROFS + ["professor"]),
              org=pick(rng, ORGS))
    for _ in range(12):
        p1 = pick(rng, MUSIC_PROFS)
        build(world, "and-from", p1=p1, p2=pick(rng, MUSIC_PROFS, (p1,)),
              city=pick(rng, cities))
    for _ in range(10):
        build(world, "born-paren", year=str(rng.randint(1941, 1979)),
              prof=pick(rng, PLAIN_PROFS), city=pick(rng, cities))
    for i in range(12):
        build(world, "who-loves", prof=MUSIC_PROFS[i % len(MUSIC_PROFS)],
              interest=list(MUSIC_INTERESTS)[i % 3])
    for i in range(9):
        build(world, "who-loves", prof=HOBBY_PROFS[i % len(HOBBY_PROFS)],
              interest=list(HOBBY_INTERESTS)[i % 3])
    for thing, count in THINGS:
        for _ in range(count):
            build(world, "who-discovered", prof=pick(rng, PLAIN_PROFS),
                  thing=thing)
    for _ in range(8):
        build(world, "univ", prof=pick(rng, PLAIN_PROFS))
    for _ in range(2):
        build(world, "was-nat-period", nat=pick(rng, nats),
              prof=pick(rng, PLAIN_PROFS))
    for iso in ISO_DATES:
        build(world, "born-date", prof=pick(rng, PLAIN_PROFS), iso=iso)
    for _ in range(10):
        build(world, "plain", prof=pick(rng, ALL_PROFS))
    for _ in range(6):
        build(world, "an-from", prof=pick(rng, VOWEL_PROFS),
              city=pick(rng, cities))
    for _ in range(5):
        p1 = pick(rng, MUSIC_PROFS)
        p2 = pick(rng, PLAIN_PROFS)
        p3 = pick(rng, MUSIC_PROFS, (p1,))
        build(world, "list-from", p1=p1, p2=p2, p3=p3, city=pick(rng, cities))
    for _ in range(5):
        build(world, "born-year", prof=pick(rng, PLAIN_PROFS),
              year=str(rng.randint(1955, 1988)))
    for _ in range(8):
        build(world, "was-plain", prof=pick(rng, PLAIN_PROFS))
    for _ in range(8):
        p1 = pick(rng, MUSIC_PROFS)
        build(world, "is-and", p1=p1, p2=pick(rng, MUSIC_PROFS, (p1,)))
    build(world, "was-who-loves", prof="novelist", interest="jazz")
    build(world, "was-born-date", prof="chemist", iso="1899-04-15")
    build(world, "was-the-of", prof="curator", org=pick(rng, ORGS))
    for award in AWARDS:
        for _ in range(award[2]):
            build(world, "won", award=award)


def seed_grammar() -> Grammar:
    g = Grammar("Relation")
    nt = Symbol.nt
    t = Symbol.term
    u = Symbol.universal
    # domain independent linguistic rules
    g.add_rule(u(), [t("a"), u()])
    g.add_rule(u(), [t("an"), u()])
    g.add_rule(u(), [t("the"), u()])
    g.add_rule(u(), [u(), t("and"), u()])
    g.add_rule(u(), [u(), t(","), u(), t("and"), u()])
    g.add_rule(nt("Relation"), [nt("Relation"), t(".")])
    # class rules
    g.add_rule(nt("Person"), [t("Person", "class")])
    g.add_rule(nt("Person"), [t("Person", "named-entity")])
    g.add_rule(nt("Location"), [t("Location", "class")])
    g.add_rule(nt("Location"), [t("Location", "named-entity")])
    g.add_rule(nt("Profession"), [t("Profession", "class")])
    g.add_rule(nt("Nationality"), [t("Nationality", "class")])
    g.add_rule(nt("Organization"), [t("Organization", "class")])
    g.add_rule(nt("Date"), [t("Date", "class")])
    g.add_rule(nt("Number"), [t("Number", "class")])
    g.add_rule(nt("Interest"), [t("Interest", "class")])
    # top-level domain rules
    g.add_rule(nt("Relation"), [nt("Person"), t("is"), nt("Life Role")])
    g.add_rule(nt("Life Role"), [nt("Life Role"), t("who"), nt("Action")])
    g.add_rule(nt("Relation"), [nt("Person"), t("won"), nt("Honor")])
    # instance seeds
    g.add_rule(nt("Profession"), [t("software"), t("engineer")])
    g.add_rule(nt("Person"), [t("Phil_Madeira", "instance")])
    return g


def main() -> None:
    out_dir = os.path.join(os.path.dirname(__file__), "..", "data")
    os.makedirs(out_dir, exist_ok=True)
    world = World()
    generate_corpus(world)
    save_corpus(world.sentences, os.path.join(out_dir, "corpus.jsonl"))
    save_grammar(seed_grammar(), os.path.join(out_dir, "seed_grammar.txt"))
    save_relations(world.relations, os.path.join(out_dir, "relations.tsv"))
    lengths = [s.length for s in world.sentences]
    print(f"{len(world.sentences)} sentences "
          f"({sum(l <= 8 for l in lengths)} of length <= 8), "
          f"{len(world.relations)} relation examples")


if __name__ == "__main__":
    main()
