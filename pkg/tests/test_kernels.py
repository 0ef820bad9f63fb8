import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from circrank import kernels
from circrank.rank import bareiss_rank

P = kernels.DEFAULT_PRIME


def _is_prime(x):
    if x < 2:
        return False
    f = 2
    while f * f <= x:
        if x % f == 0:
            return False
        f += 1
    return True


def test_primes_are_the_largest_below_2_31():
    assert all(_is_prime(p) for p in kernels.PRIMES)
    assert list(kernels.PRIMES) == sorted(kernels.PRIMES, reverse=True)
    between = [x for x in range(kernels.PRIMES[-1], 2 ** 31) if _is_prime(x)]
    assert sorted(between, reverse=True) == list(kernels.PRIMES)


int_mats = st.integers(1, 9).flatmap(
    lambda r: st.integers(1, 9).flatmap(
        lambda c: st.lists(st.integers(0, 1), min_size=r * c, max_size=r * c).map(
            lambda v: np.array(v, dtype=np.int64).reshape(r, c))))


@given(int_mats)
def test_rank_paths_agree(mat):
    loops = int(kernels._rank_mod_loops(mat, P))
    assert loops == int(kernels._rank_mod_numpy(mat, P))
    assert loops == bareiss_rank(mat.tolist())


@given(int_mats)
def test_nullspace_paths_agree(mat):
    a = kernels._nullspace_mod_loops(mat, P)
    b = kernels._nullspace_mod_numpy(mat, P)
    assert np.array_equal(a, b)
    assert a.shape[0] == mat.shape[1] - bareiss_rank(mat.tolist())
    assert not ((mat @ a.T) % P).any()


@given(int_mats, st.lists(st.integers(0, 511), min_size=1, max_size=20))
def test_span_paths_agree(mat, raw):
    null = kernels._nullspace_mod_loops(mat, P)
    masks = np.array([m & ((1 << mat.shape[1]) - 1) for m in raw], dtype=np.uint64)
    a = kernels._masks_in_span_loops(masks, null, P)
    b = kernels._masks_in_span_numpy(masks, null, P)
    assert np.array_equal(a, b)
    for mask, ok in zip(masks.tolist(), a.tolist()):
        vec = [(mask >> j) & 1 for j in range(mat.shape[1])]
        in_span = bareiss_rank(mat.tolist() + [vec]) == bareiss_rank(mat.tolist())
        assert ok == in_span


@given(int_mats)
def test_isolation_paths_agree(mat):
    rows = np.array([sum(int(v) << j for j, v in enumerate(row)) for row in mat], dtype=np.uint64)
    cells = np.argwhere(mat)
    cr = cells[:, 0].astype(np.int64)
    cc = cells[:, 1].astype(np.int64)
    a = kernels._isolation_greedy_loops(rows, cr, cc)
    b = kernels._isolation_greedy_numpy(rows, cr, cc)
    assert np.array_equal(a[0], b[0]) and np.array_equal(a[1], b[1])


@pytest.mark.parametrize("mode", [0, 1, 2])
@given(mat=int_mats, data=st.data())
def test_cell_rect_paths_agree(mode, mat, data):
    if not mat.any():
        return
    rows = np.array([sum(int(v) << j for j, v in enumerate(row)) for row in mat], dtype=np.uint64)
    a, b = map(int, data.draw(st.sampled_from(np.argwhere(mat).tolist())))
    rnull = kernels._nullspace_mod_loops(mat, P)
    cnull = kernels._nullspace_mod_loops(np.ascontiguousarray(mat.T), P)
    big = 1 << 16
    n1, A1, B1 = kernels._cell_rects_loops(rows, a, b, rnull, cnull, P, mode, big, True)
    n2, A2, B2 = kernels._cell_rects_numpy(rows, a, b, rnull, cnull, P, mode, big, True)
    assert n1 == n2
    assert sorted(zip(A1.tolist(), B1.tolist())) == sorted(zip(A2.tolist(), B2.tolist()))
    c1, _, _ = kernels._cell_rects_loops(rows, a, b, rnull, cnull, P, mode, big, False)
    assert c1 == n1
    for A, B in zip(A1.tolist(), B1.tolist()):
        assert A >> a & 1 and B >> b & 1
        for r in range(mat.shape[0]):
            if A >> r & 1:
                assert int(rows[r]) & B == B


def test_cell_rects_unfiltered_counts_everything():
    rows = np.array([0b11, 0b11], dtype=np.uint64)
    empty = np.zeros((0, 2), dtype=np.int64)
    count, A, B = kernels.cell_rects(rows, 0, 0, empty, empty, P, 0, 100, True)
    # through (0, 0) of the all-one 2 x 2: choose the other row and the other column freely
    assert count == 4 and len(A) == 4


def test_backend_flag_reported():
    assert kernels.BACKEND in ("numba", "numpy")


@pytest.mark.parametrize("flag, want", [("1", "numpy"), ("", None)])
def test_env_flag_selects_backend(flag, want):
    from circrank._accel import NUMBA_AVAILABLE

    env = dict(os.environ, CIRCRANK_NO_NUMBA=flag)
    out = subprocess.run([sys.executable, "-c", "import circrank; print(circrank.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True).stdout.strip()
    assert out == (want or ("numba" if NUMBA_AVAILABLE else "numpy"))
