"""Context-free grammar with rule properties and universal rule schemas.

Symbols are either non-terminals (semantic classes, written ``<Name>``),
terminals (layer tokens, written ``value{layer}``, layer omitted for
lexical), or the single universal non-terminal ``<*>`` which stands for any
non-terminal; all its occurrences in a rule co-instantiate.

Each rule carries a property driving its role:

    positive       used for parsing and for bottom-up generalization
    non-inducible  used for parsing only
    neutral        used nowhere; its (lhs, rhs) can never be re-added
    negative       kept for file fidelity, treated exactly like neutral

plus a trigger probability (estimated after induction) and an origin tag.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field, replace
from typing import Iterator, Optional

from .corpus import LEXICAL

NONTERMINAL = "nonterminal"
TERMINAL = "terminal"
UNIVERSAL = "universal"

POSITIVE = "positive"
NEUTRAL = "neutral"
NEGATIVE = "negative"
NON_INDUCIBLE = "non-inducible"
PROPERTIES = (POSITIVE, NEUTRAL, NEGATIVE, NON_INDUCIBLE)

PARSING = "parsing"
INDUCTION = "induction"

_property = property  # Rule has a field named `property`; keep the builtin usable


class GrammarError(Exception):
    pass


class NeutralReadditionError(GrammarError):
    """The (lhs, rhs) pair was marked neutral and may not come back."""


@dataclass(frozen=True)
class Symbol:
    kind: str
    name: str = ""    # non-terminal class name
    value: str = ""   # terminal token value
    layer: str = ""   # terminal layer

    @staticmethod
    def nt(name: str) -> "Symbol":
        return Symbol(NONTERMINAL, name=name)

    @staticmethod
    def term(value: str, layer: str = LEXICAL) -> "Symbol":
        return Symbol(TERMINAL, value=value, layer=layer)

    @staticmethod
    def universal() -> "Symbol":
        return Symbol(UNIVERSAL)

    @property
    def is_terminal(self) -> bool:
        return self.kind == TERMINAL

    @property
    def is_universal(self) -> bool:
        return self.kind == UNIVERSAL

    @property
    def is_nonterminal(self) -> bool:
        return self.kind == NONTERMINAL

    def display(self) -> str:
        if self.kind == NONTERMINAL:
            return f"<{self.name}>"
        if self.kind == UNIVERSAL:
            return "<*>"
        if self.layer == LEXICAL:
            return self.value
        return f"{self.value}{{{self.layer}}}"

    def __str__(self) -> str:
        return self.display()


_TERMINAL_RE = re.compile(r"^(?P<value>.*?)\{(?P<layer>[^{}]+)\}$")


def parse_symbol(text: str) -> Symbol:
    """Inverse of Symbol.display(). Accepts ``<_>`` as the universal symbol."""
    if text.startswith("<") and text.endswith(">") and len(text) > 2:
        inner = text[1:-1]
        if inner in ("*", "_"):
            return Symbol.universal()
        return Symbol.nt(inner)
    m = _TERMINAL_RE.match(text)
    if m:
        return Symbol.term(m.group("value"), m.group("layer"))
    if not text or any(c.isspace() for c in text):
        raise GrammarError(f"cannot parse symbol {text!r}")
    return Symbol.term(text)


@dataclass(frozen=True)
class Rule:
    id: int
    lhs: Symbol
    rhs: tuple[Symbol, ...]
    property: str = POSITIVE
    trigger_probability: float = 0.0
    origin: str = "seed"  # "seed" or "induced:<iteration>"

    @_property
    def key(self) -> tuple:
        """Identity for dedup and the neutral blacklist: the (lhs, rhs) pair."""
        return (self.lhs, self.rhs)

    @_property
    def is_schema(self) -> bool:
        return self.lhs.is_universal or any(s.is_universal for s in self.rhs)

    def nonterminal_slots(self) -> tuple[int, ...]:
        """Indexes of rhs symbols that are (universal) non-terminals."""
        return tuple(i for i, s in enumerate(self.rhs) if not s.is_terminal)

    def display(self) -> str:
        rhs = " ".join(s.display() for s in self.rhs)
        return f"{self.lhs.display()} ::= {rhs}"

    def __str__(self) -> str:
        return self.display()


def _validate_rule(lhs: Symbol, rhs: tuple[Symbol, ...]) -> None:
    if lhs.is_terminal:
        raise GrammarError("rule lhs must be a non-terminal")
    if not rhs:
        raise GrammarError("empty rhs: the grammar has no epsilon productions")
    if lhs.is_universal and not any(s.is_universal for s in rhs):
        raise GrammarError(
            f"universal lhs requires a universal rhs occurrence: "
            f"{lhs.display()} ::= {' '.join(s.display() for s in rhs)}")


def instantiate_universal(rule: Rule, class_name: str) -> Rule:
    """Replace every universal occurrence by <class_name>.

    The result is concrete and keeps the schema's id, property, trigger
    probability and origin.
    """
    if not rule.is_schema:
        raise GrammarError(f"rule {rule.id} has no universal symbol")
    nt = Symbol.nt(class_name)
    lhs = nt if rule.lhs.is_universal else rule.lhs
    rhs = tuple(nt if s.is_universal else s for s in rule.rhs)
    return replace(rule, lhs=lhs, rhs=rhs)


class Grammar:
    """Mutable rule store; parsers work on immutable snapshots.

    The version counter bumps on every mutation, so a parse result can name
    the exact grammar state it came from.
    """

    def __init__(self, start_symbol: str = "Relation"):
        self.start_symbol = start_symbol
        self.rules: dict[int, Rule] = {}
        self.version = 0
        self._by_key: dict[tuple, int] = {}
        self._blacklist: set[tuple] = set()  # neutral/negative (lhs, rhs) pairs
        self._next_id = 1

    def __len__(self) -> int:
        return len(self.rules)

    def __iter__(self) -> Iterator[Rule]:
        return iter(self.rules[i] for i in sorted(self.rules))

    @property
    def non_terminals(self) -> set[str]:
        names: set[str] = {self.start_symbol}
        for rule in self.rules.values():
            if rule.lhs.is_nonterminal:
                names.add(rule.lhs.name)
            names.update(s.name for s in rule.rhs if s.is_nonterminal)
        return names

    def rule(self, rule_id: int) -> Rule:
        return self.rules[rule_id]

    def is_blacklisted(self, lhs: Symbol, rhs: tuple[Symbol, ...]) -> bool:
        return (lhs, tuple(rhs)) in self._blacklist

    def add_rule(self, lhs: Symbol, rhs, property: str = POSITIVE,
                 origin: str = "seed", trigger_probability: float = 0.0) -> int:
        """Add a rule; returns its id.

        Re-adding an identical (lhs, rhs, property) is idempotent. Re-adding
        a neutral/negative pair under any other property raises. Re-adding an
        active pair with a different property is treated as a property edit.
        """
        rhs = tuple(rhs)
        if property not in PROPERTIES:
            raise GrammarError(f"unknown property {property!r}")
        _validate_rule(lhs, rhs)
        key = (lhs, rhs)
        existing_id = self._by_key.get(key)
        if existing_id is not None:
            existing = self.rules[existing_id]
            if existing.property == property:
                return existing_id
            if existing.property in (NEUTRAL, NEGATIVE):
                raise NeutralReadditionError(
                    f"rule {existing.display()!r} was marked "
                    f"{existing.property} and cannot be re-added")
            self.set_property(existing_id, property)
            return existing_id
        if key in self._blacklist:
            raise NeutralReadditionError(
                f"rule {lhs.display()} ::= "
                f"{' '.join(s.display() for s in rhs)} was marked neutral "
                "and cannot be re-induced")
        rule = Rule(self._next_id, lhs, rhs, property,
                    trigger_probability, origin)
        self.rules[rule.id] = rule
        self._by_key[key] = rule.id
        if property in (NEUTRAL, NEGATIVE):
            self._blacklist.add(key)
        self._next_id += 1
        self.version += 1
        return rule.id

    def set_property(self, rule_id: int, property: str) -> None:
        if property not in PROPERTIES:
            raise GrammarError(f"unknown property {property!r}")
        rule = self.rules[rule_id]
        if rule.property == property:
            return
        if rule.property in (NEUTRAL, NEGATIVE):
            raise NeutralReadditionError(
                f"rule {rule.display()!r} is {rule.property} and stays so")
        self.rules[rule_id] = replace(rule, property=property)
        if property in (NEUTRAL, NEGATIVE):
            self._blacklist.add(rule.key)
        self.version += 1

    def set_trigger_probability(self, rule_id: int, tp: float) -> None:
        if not 0.0 <= tp <= 1.0:
            raise GrammarError(f"trigger probability {tp} outside [0, 1]")
        self.rules[rule_id] = replace(self.rules[rule_id],
                                      trigger_probability=tp)
        self.version += 1

    def active_rules(self, phase: str) -> list[Rule]:
        """Rules participating in a phase, in id order.

        parsing: positive + non-inducible; induction: positive only.
        Neutral and negative rules are never returned.
        """
        if phase == PARSING:
            allowed = (POSITIVE, NON_INDUCIBLE)
        elif phase == INDUCTION:
            allowed = (POSITIVE,)
        else:
            raise GrammarError(f"unknown phase {phase!r}")
        return [self.rules[i] for i in sorted(self.rules)
                if self.rules[i].property in allowed]

    def snapshot(self) -> "GrammarSnapshot":
        return GrammarSnapshot(self)


class GrammarSnapshot:
    """Frozen view of a grammar at one version, indexed for parsing.

    Concrete parsing rules are indexed by lhs class; universal schemas are
    instantiated lazily for the class being expanded (and cached), instead of
    duplicating each schema for every non-terminal.
    """

    def __init__(self, grammar: Grammar):
        self.version = grammar.version
        self.start_symbol = grammar.start_symbol
        self.rules: dict[int, Rule] = dict(grammar.rules)
        self._parsing_by_lhs: dict[str, tuple[Rule, ...]] = {}
        self._schemas: list[Rule] = []
        self._instantiated: dict[str, tuple[Rule, ...]] = {}
        by_lhs: dict[str, list[Rule]] = {}
        for rule in grammar.active_rules(PARSING):
            if rule.is_schema:
                self._schemas.append(rule)
            else:
                by_lhs.setdefault(rule.lhs.name, []).append(rule)
        self._parsing_by_lhs = {k: tuple(v) for k, v in by_lhs.items()}
        self.induction_rules: tuple[Rule, ...] = tuple(
            grammar.active_rules(INDUCTION))

    def rule(self, rule_id: int) -> Rule:
        return self.rules[rule_id]

    def trigger_probability(self, rule_id: Optional[int]) -> float:
        if rule_id is None:
            return 0.0
        return self.rules[rule_id].trigger_probability

    def parsing_rules_for(self, class_name: str) -> tuple[Rule, ...]:
        """Concrete + instantiated-schema rules expanding <class_name>."""
        cached = self._instantiated.get(class_name)
        if cached is None:
            extra = tuple(instantiate_universal(s, class_name)
                          for s in self._schemas if s.lhs.is_universal)
            cached = tuple(sorted(
                self._parsing_by_lhs.get(class_name, ()) + extra,
                key=lambda r: r.id))
            self._instantiated[class_name] = cached
        return cached


# ---------------------------------------------------------------------------
# Grammar file: one rule per line,
#   property <TAB> lhs ::= rhs [<TAB> tp=<float>] [<TAB> origin=<tag>]
# with '#'-comments; a '# start: <Name>' header records the start symbol.

def save_grammar(grammar: Grammar, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"# start: <{grammar.start_symbol}>\n")
        for rule in grammar:
            fh.write(f"{rule.property}\t{rule.display()}"
                     f"\ttp={rule.trigger_probability!r}"
                     f"\torigin={rule.origin}\n")


def _split_symbols(text: str) -> list[str]:
    """Split a rule side into symbol chunks; '<...>' may contain spaces."""
    out: list[str] = []
    i, n = 0, len(text)
    while i < n:
        if text[i].isspace():
            i += 1
        elif text[i] == "<":
            j = text.find(">", i)
            if j == -1:
                raise GrammarError(f"unclosed '<' in {text!r}")
            out.append(text[i:j + 1])
            i = j + 1
        else:
            j = i
            while j < n and not text[j].isspace():
                j += 1
            out.append(text[i:j])
            i = j
    return out


def parse_rule_text(text: str) -> tuple[Symbol, tuple[Symbol, ...]]:
    """Parse display notation 'lhs ::= rhs' back into symbols."""
    if "::=" not in text:
        raise GrammarError("missing '::='")
    lhs_text, rhs_text = text.split("::=", 1)
    lhs = parse_symbol(lhs_text.strip())
    rhs = tuple(parse_symbol(tok) for tok in _split_symbols(rhs_text))
    return lhs, rhs


def load_grammar(path) -> Grammar:
    """Lossless inverse of save_grammar. Errors carry line numbers."""
    grammar = Grammar()
    start_seen = False
    with open(path, encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n")
            if not line.strip():
                continue
            if line.startswith("#"):
                m = re.match(r"#\s*start:\s*<(.+)>\s*$", line)
                if m:
                    grammar.start_symbol = m.group(1)
                    start_seen = True
                continue
            parts = line.split("\t")
            if len(parts) < 2:
                raise GrammarError(
                    f"{path}:{line_no}: expected 'property<TAB>rule'")
            prop = parts[0].strip()
            tp = 0.0
            origin = "seed"
            for extra in parts[2:]:
                extra = extra.strip()
                if extra.startswith("tp="):
                    tp = float(extra[3:])
                elif extra.startswith("origin="):
                    origin = extra[7:]
                elif extra:
                    raise GrammarError(f"{path}:{line_no}: unknown field {extra!r}")
            try:
                lhs, rhs = parse_rule_text(parts[1])
                grammar.add_rule(lhs, rhs, property=prop, origin=origin,
                                 trigger_probability=tp)
            except GrammarError as exc:
                raise GrammarError(f"{path}:{line_no}: {exc}") from None
    if not start_seen and grammar.rules:
        first = grammar.rules[min(grammar.rules)]
        if first.lhs.is_nonterminal:
            grammar.start_symbol = first.lhs.name
    return grammar
