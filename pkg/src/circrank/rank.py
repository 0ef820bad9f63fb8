"""Exact real rank and the closed-form rank formulas for circulant blocks."""

from __future__ import annotations

import math
from functools import lru_cache
from fractions import Fraction as Rational  # noqa: F401  (re-exported exactness carrier)

import numpy as np

from . import kernels
from .matrix import BlockSpec, Matrix01


def bareiss_rank(rows) -> int:
    """Rank of an integer matrix by fraction-free (Bareiss) elimination.

    Pivot choice is the leftmost column with a nonzero entry, topmost row first.
    Works on arbitrary Python ints, so the result is exact for any input.
    """
    a = [[int(v) for v in row] for row in rows]
    if not a:
        return 0
    n_rows, n_cols = len(a), len(a[0])
    rank = 0
    prev = 1
    for col in range(n_cols):
        if rank == n_rows:
            break
        piv = next((r for r in range(rank, n_rows) if a[r][col] != 0), None)
        if piv is None:
            continue
        a[rank], a[piv] = a[piv], a[rank]
        p = a[rank][col]
        for r in range(rank + 1, n_rows):
            f = a[r][col]
            row_r, row_p = a[r], a[rank]
            for c in range(col + 1, n_cols):
                row_r[c] = (p * row_r[c] - f * row_p[c]) // prev
            row_r[col] = 0
        prev = p
        rank += 1
    return rank


@lru_cache(maxsize=None)
def primes_needed(size: int) -> int:
    """How many of :data:`kernels.PRIMES` certify the rank of a 0/1 matrix.

    Any nonzero ``s x s`` minor of a 0/1 matrix is at most
    ``(s+1)**((s+1)/2) / 2**s`` in absolute value, so once the product of the
    primes exceeds that bound some prime keeps the minor nonzero and the
    maximum of the modular ranks equals the rational rank.
    """
    s = max(size, 1)
    bound_sq = (s + 1) ** (s + 1)
    prod = 1
    for used, p in enumerate(kernels.PRIMES, start=1):
        prod *= p
        if prod * prod * 4 ** s > bound_sq:
            return used
    raise ValueError(f"matrix dimension {size} too large for the built-in prime list")


def modular_rank(dense01) -> int:
    """Exact rank of a 0/1 matrix as the maximum of its ranks modulo enough primes."""
    mat = np.ascontiguousarray(dense01, dtype=np.int64)
    if mat.size == 0:
        return 0
    full = min(mat.shape)
    try:
        count = primes_needed(full)
    except ValueError:
        return bareiss_rank(mat.tolist())
    best = 0
    for p in kernels.PRIMES[:count]:
        best = max(best, int(kernels.rank_mod(mat, p)))
        if best == full:
            break
    return best


def real_rank(M: Matrix01, method: str = "modular") -> int:
    """Rank of ``M`` over the rationals.

    ``method="modular"`` (default) runs the multi-prime kernel, which is exact by
    the Hadamard argument in :func:`primes_needed`; ``method="bareiss"`` runs
    fraction-free elimination on Python integers.
    """
    if method == "modular":
        return modular_rank(M.to_dense())
    if method == "bareiss":
        return bareiss_rank(M.to_dense().tolist())
    raise ValueError(f"unknown rank method {method!r}")


def formula_rank_D(n: int, k: int) -> int:
    """Rank of the k-regular circulant ``D(n, n-k)``: ``n - gcd(n, k) + 1`` for ``n >= k > 0``."""
    if not n >= k > 0:
        raise ValueError(f"formula needs n >= k > 0 (got n={n}, k={k}); "
                         "D(n, n) has rank 0 and D(n, 0) rank 1")
    return n - math.gcd(n, k) + 1


class AllOneException(ValueError):
    """The spec describes the all-one matrix, where the rank formula does not apply."""


def formula_rank_spec(spec: BlockSpec, complemented: bool = False) -> int:
    """``sum(n_i - gcd(n_i, k_i) + 1)``, the rank of the matrix and of its complement.

    Raises :class:`AllOneException` for the single all-one block: that matrix
    has rank 1 while its complement (the zero matrix) has rank 0.
    """
    if any(k == 0 for k in spec.ks):
        raise ValueError("formula_rank_spec needs k_i > 0 in every block")
    if spec.m == 1 and spec.blocks[0][0] == spec.blocks[0][1]:
        raise AllOneException(f"spec {spec} is the all-one matrix (rank 1, complement rank 0)")
    return sum(formula_rank_D(n, k) for n, k in spec.blocks)


def all_one_in_row_span(M: Matrix01) -> bool:
    dense = M.to_dense()
    stacked = np.vstack([dense, np.ones((1, M.n_cols), dtype=dense.dtype)])
    return modular_rank(stacked) == modular_rank(dense)
