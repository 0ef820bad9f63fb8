import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from circrank.matrix import (
    BlockSpec,
    GlobalIndex,
    Matrix01,
    MatrixFormatError,
    build_block_diagonal,
    build_D,
    complement,
    inverse_perm,
    is_k_regular,
    load_matrix,
    permute,
)

from strategies import matrices, specs


def test_build_D_first_rows():
    D = build_D(4, 2).to_dense()
    assert D[0].tolist() == [1, 1, 0, 0]
    assert D[1].tolist() == [0, 1, 1, 0]


def test_build_D_degenerate():
    assert build_D(3, 0) == Matrix01.ones(3, 3)
    assert build_D(3, 3).count_ones() == 0


@pytest.mark.parametrize("n,k", [(0, 0), (3, 4), (3, -1)])
def test_build_D_rejects(n, k):
    with pytest.raises(ValueError):
        build_D(n, k)


@given(st.integers(1, 12), st.data())
def test_build_D_rows_are_shifts(n, data):
    k = data.draw(st.integers(0, n))
    D = build_D(n, k).to_dense()
    for i in range(1, n):
        assert np.array_equal(D[i], np.roll(D[i - 1], 1))


def test_block_diagonal_examples():
    M = build_block_diagonal(BlockSpec.parse("2;2,3")).to_dense()
    assert M.shape == (5, 5)
    assert np.array_equal(M[:2, :2], build_D(2, 0).to_dense())
    assert np.array_equal(M[2:, 2:], build_D(3, 1).to_dense())
    assert not M[:2, 2:].any() and not M[2:, :2].any()
    assert build_block_diagonal(BlockSpec.parse("2;7")) == build_D(7, 5)
    M44 = build_block_diagonal(BlockSpec.parse("2;4,4"))
    assert M44.count_ones() == 16
    assert complement(M44).count_ones() == 48


@given(specs(max_m=4))
def test_block_rows_are_regular_inside_their_block(spec):
    dense = build_block_diagonal(spec).to_dense()
    for i, (n_i, k_i) in enumerate(spec.blocks, start=1):
        rng = spec.block_range(i)
        rows = dense[rng.start:rng.stop]
        assert (rows.sum(axis=1) == k_i).all()
        assert rows[:, rng.start:rng.stop].sum() == n_i * k_i
    assert build_block_diagonal(spec).count_ones() == sum(n * k for n, k in spec.blocks)
    assert complement(build_block_diagonal(spec)).count_ones() == spec.n ** 2 - sum(n * k for n, k in spec.blocks)


@given(st.integers(1, 4), st.lists(st.integers(1, 8), min_size=1, max_size=4))
def test_common_k_is_regular(k, sizes):
    sizes = [max(s, k) for s in sizes]
    assert is_k_regular(build_block_diagonal(BlockSpec.common(k, sizes))) == k


def test_is_k_regular_examples():
    assert is_k_regular(build_D(5, 3)) == 2
    assert is_k_regular(Matrix01.ones(3, 3)) == 3
    d = np.eye(3, dtype=np.uint8)
    d[0, 1] = 1
    assert is_k_regular(Matrix01.from_dense(d)) is None
    with pytest.raises(ValueError):
        is_k_regular(Matrix01.ones(2, 3))


@given(matrices(max_rows=8, max_cols=8))
def test_complement_involution(M):
    assert complement(complement(M)) == M


def test_permute_examples():
    D = build_D(4, 2)
    assert permute(D, range(4), range(4)) == D
    rev = permute(D, range(4), [3, 2, 1, 0]).to_dense()
    assert np.array_equal(rev, D.to_dense()[:, ::-1])
    with pytest.raises(ValueError):
        permute(D, [0, 1, 2], range(4))
    with pytest.raises(ValueError):
        permute(D, [0, 0, 1, 2], range(4))


@given(matrices(max_rows=7, max_cols=7), st.randoms(use_true_random=False))
def test_permute_inverse(M, rnd):
    rp = list(range(M.n_rows))
    cp = list(range(M.n_cols))
    rnd.shuffle(rp)
    rnd.shuffle(cp)
    assert permute(permute(M, rp, cp), inverse_perm(rp), inverse_perm(cp)) == M


@given(matrices(max_rows=5, max_cols=70))
def test_packing_roundtrip(M):
    assert Matrix01.from_dense(M.to_dense()) == M
    assert M.T.T == M
    assert Matrix01.from_text(M.to_text()) == M
    assert Matrix01.from_json(json.loads(json.dumps(M.to_json()))) == M
    assert load_matrix(json.dumps(M.to_json())) == M
    assert load_matrix(M.to_text()) == M


def test_wide_rows_keep_padding_clear():
    M = Matrix01.ones(2, 65)
    assert M.words.shape == (2, 2)
    assert int(M.words[0, 1]) == 1
    assert M.count_ones() == 130


@pytest.mark.parametrize(
    "text,line,col",
    [
        ("2 2\n10\n1x\n", 3, 2),
        ("2 2\n10\n", None, None),
        ("2 3\n101\n11\n", 3, None),
        ("a b\n", 1, None),
    ],
)
def test_text_format_errors(text, line, col):
    with pytest.raises(MatrixFormatError) as err:
        Matrix01.from_text(text)
    if line is not None:
        assert err.value.line == line
    if col is not None:
        assert err.value.column == col


def test_spec_parsing():
    assert BlockSpec.parse(" 2 ; 4 , 4 ") == BlockSpec(((4, 2), (4, 2)))
    assert BlockSpec.parse("1,3;4,6").blocks == ((4, 1), (6, 3))
    assert str(BlockSpec.parse("2;4,3")) == "2;4,3"
    for bad in ("2,4,4", "2;4;4", "1,2;4", "x;4", "5;4"):
        with pytest.raises(MatrixFormatError):
            BlockSpec.parse(bad)
    with pytest.raises(ValueError):
        BlockSpec(((3, 4),))


def test_spec_derived_and_json():
    s = BlockSpec.parse("6;9,9,6")
    assert s.n == 24 and s.m == 3
    assert s.d == (3, 3, 6)
    assert s.d_hat == (3, 3, 1)
    assert s.common_k == 6
    assert BlockSpec.from_json(json.loads(json.dumps(s.to_json()))) == s
    assert BlockSpec.parse("0;3").d == (3,)


@given(specs(max_m=4))
def test_global_index_roundtrip(spec):
    for flat in range(spec.n):
        g = spec.global_index(flat)
        assert 1 <= g.offset <= spec.blocks[g.block - 1][0]
        assert spec.flat(g) == flat
    with pytest.raises(IndexError):
        spec.flat(GlobalIndex(spec.m + 1, 1))
