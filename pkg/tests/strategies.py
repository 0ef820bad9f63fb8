"""Shared hypothesis strategies."""

import numpy as np
from hypothesis import strategies as st

from circrank.matrix import BlockSpec, Matrix01


@st.composite
def matrices(draw, max_rows=6, max_cols=6, max_ones=None):
    r = draw(st.integers(1, max_rows))
    c = draw(st.integers(1, max_cols))
    bits = draw(st.lists(st.booleans(), min_size=r * c, max_size=r * c))
    dense = np.array(bits, dtype=np.uint8).reshape(r, c)
    if max_ones is not None:
        ones = np.argwhere(dense)
        for i, j in ones[max_ones:]:
            dense[i, j] = 0
    return Matrix01.from_dense(dense)


@st.composite
def specs(draw, max_m=3, max_n=10, min_k=0):
    m = draw(st.integers(1, max_m))
    blocks = []
    for _ in range(m):
        n = draw(st.integers(max(1, min_k), max_n))
        k = draw(st.integers(min_k, n))
        blocks.append((n, k))
    return BlockSpec(tuple(blocks))
