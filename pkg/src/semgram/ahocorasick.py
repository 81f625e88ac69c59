"""Aho-Corasick multi-pattern matching over sequences of hashable symbols.

Builds the goto trie from the patterns, computes failure links breadth-first
and propagates outputs along them, then scans an input sequence once,
reporting every (start, end, payload) occurrence. The alphabet is whatever
the symbols hash as, so this works on token/symbol sequences, not just
characters.

The scanner keeps a set of active states instead of a single one so a
caller can feed alternative symbols for one position (used for wildcard
symbols that stand for any non-terminal).
"""

from __future__ import annotations

from collections import deque
from typing import Callable, Hashable, Iterable, Optional, Sequence


class _Node:
    __slots__ = ("children", "fail", "output", "depth")

    def __init__(self, depth: int = 0):
        self.children: dict = {}
        self.fail: Optional["_Node"] = None
        self.output: list[tuple[int, object]] = []  # (pattern length, payload)
        self.depth = depth


class SymbolMatcher:
    """Aho-Corasick automaton over symbol sequences."""

    def __init__(self):
        self._root = _Node()
        self._built = False

    def add(self, pattern: Sequence[Hashable], payload) -> None:
        node = self._root
        for depth, sym in enumerate(pattern, start=1):
            nxt = node.children.get(sym)
            if nxt is None:
                nxt = _Node(depth)
                node.children[sym] = nxt
            node = nxt
        node.output.append((len(pattern), payload))
        self._built = False

    def build(self) -> None:
        root = self._root
        root.fail = root
        queue: deque[_Node] = deque()
        for child in root.children.values():
            child.fail = root
            queue.append(child)
        while queue:
            current = queue.popleft()
            for sym, child in current.children.items():
                fallback = current.fail
                while fallback is not root and sym not in fallback.children:
                    fallback = fallback.fail
                target = fallback.children.get(sym, root)
                child.fail = root if target is child else target
                child.output = child.output + child.fail.output
                queue.append(child)
        self._built = True

    def _advance(self, node: _Node, sym) -> Optional[_Node]:
        root = self._root
        while node is not root and sym not in node.children:
            node = node.fail
        return node.children.get(sym)

    def scan(self, sequence: Sequence,
             alternatives: Optional[Callable[[object], Iterable]] = None,
             ) -> list[tuple[int, int, object]]:
        """All pattern occurrences in `sequence` as (start, end, payload).

        `alternatives(symbol)` may yield extra symbols to feed at the same
        position (e.g. a wildcard key); matches found through them report
        the same positions.
        """
        if not self._built:
            self.build()
        root = self._root
        active: dict[int, _Node] = {id(root): root}
        found: list[tuple[int, int, object]] = []
        seen: set[tuple[int, int, int]] = set()
        for pos, sym in enumerate(sequence):
            feeds = [sym]
            if alternatives is not None:
                feeds.extend(alternatives(sym))
            nxt: dict[int, _Node] = {id(root): root}
            for node in active.values():
                for feed in feeds:
                    target = self._advance(node, feed)
                    if target is not None:
                        nxt[id(target)] = target
            for node in nxt.values():
                for plen, payload in node.output:
                    key = (pos + 1 - plen, pos + 1, id(payload))
                    if key not in seen:
                        seen.add(key)
                        found.append((pos + 1 - plen, pos + 1, payload))
            active = nxt
        return found
