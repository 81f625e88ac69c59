# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled match kernel: hot twin of ``_matchpure.py``.

Same contract, same result order. Any semantic change must land in both
files; the test suite cross-checks them on every bundled sentence.
"""

KERNEL_NAME = "cython"


cdef class _State:
    cdef list results
    cdef list spans
    cdef int[:] kinds
    cdef int[:] layer_idxs
    cdef int[:] val_ids
    cdef list pos_toks
    cdef list tok_starts
    cdef list tok_ends
    cdef list tok_vals
    cdef int n, end, first_wc, first_cap


cdef void _go(_State st, int i, int p):
    cdef int v, lay, t, q, max_len, length
    cdef int[:] pt, ts, te, tv
    if i == st.n:
        if p == st.end:
            st.results.append(list(st.spans))
        return
    if st.kinds[i] == 1:
        if p >= st.end:
            return
        v = st.val_ids[i]
        if v < 0:
            return
        lay = st.layer_idxs[i]
        pt = st.pos_toks[lay]
        ts = st.tok_starts[lay]
        te = st.tok_ends[lay]
        tv = st.tok_vals[lay]
        t = pt[p]
        if ts[t] != p or tv[t] != v:
            return
        q = te[t]
        if q > st.end:
            return
        _go(st, i + 1, q)
    else:
        max_len = st.end - p - (st.n - i - 1)
        if i == st.first_wc and st.first_cap > 0 and st.first_cap < max_len:
            max_len = st.first_cap
        for length in range(1, max_len + 1):
            st.spans.append(p)
            st.spans.append(p + length)
            _go(st, i + 1, p + length)
            del st.spans[-2:]


def enumerate_matches(kinds, layer_idxs, val_ids, pos_toks, tok_starts,
                      tok_ends, tok_vals, int start, int end,
                      int first_wc, int first_cap):
    """See ``_matchpure.enumerate_matches`` for the full contract."""
    cdef _State st = _State()
    st.results = []
    st.spans = []
    st.kinds = kinds
    st.layer_idxs = layer_idxs
    st.val_ids = val_ids
    st.pos_toks = pos_toks
    st.tok_starts = tok_starts
    st.tok_ends = tok_ends
    st.tok_vals = tok_vals
    st.n = len(kinds)
    st.end = end
    st.first_wc = first_wc
    st.first_cap = first_cap
    _go(st, 0, start)
    return st.results
