"""Pure-Python match kernel: reference twin of ``_matchcore.pyx``.

Both kernels implement the identical contract and must return identical
results in identical order; the compiled one is selected at import when
available. Keep the two in lockstep.
"""

from __future__ import annotations

KERNEL_NAME = "python"


def enumerate_matches(kinds, layer_idxs, val_ids, pos_toks, tok_starts,
                      tok_ends, tok_vals, start, end, first_wc, first_cap):
    """Enumerate every way the pattern can tile the span [start, end).

    kinds[i]      0 = wildcard (matches >= 1 word), 1 = terminal
    layer_idxs[i] terminal's slot into the per-layer arrays
    val_ids[i]    terminal's required token value id (-1: absent from layer)
    pos_toks[L]   word position -> token row, per layer slot
    tok_starts[L] / tok_ends[L] / tok_vals[L]
                  token row -> span start / span end / value id (-1 = null)
    first_wc      index of the first wildcard element, -1 if none
    first_cap     max word length of the first wildcard span (0 = uncapped)

    Returns a list of flat span lists [s0, e0, s1, e1, ...], one (start, end)
    pair per wildcard in pattern order. Order is deterministic: depth-first,
    wildcard lengths ascending.
    """
    n = len(kinds)
    results: list[list[int]] = []
    spans: list[int] = []

    def go(i: int, p: int) -> None:
        if i == n:
            if p == end:
                results.append(spans.copy())
            return
        if kinds[i] == 1:
            if p >= end:
                return
            v = val_ids[i]
            if v < 0:
                return
            lay = layer_idxs[i]
            t = pos_toks[lay][p]
            if tok_starts[lay][t] != p or tok_vals[lay][t] != v:
                return
            q = tok_ends[lay][t]
            if q > end:
                return
            go(i + 1, q)
        else:
            max_len = end - p - (n - i - 1)
            if i == first_wc and first_cap > 0 and first_cap < max_len:
                max_len = first_cap
            for length in range(1, max_len + 1):
                spans.append(p)
                spans.append(p + length)
                go(i + 1, p + length)
                del spans[-2:]

    go(0, start)
    return results
