"""Explicit rectangle partitions: M(t, r) witnesses and the block-merge construction.

Rows and columns of rectangles are 0-based flat indices.  Witness labels are
0-based too: label ``l`` in code is label ``l + 1`` in the usual 1-based
notation, and the special labels are ``0 .. r-1``.
"""

from __future__ import annotations

import math
from functools import lru_cache
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .matrix import BlockSpec, Matrix01, build_D, complement


@dataclass(frozen=True)
class Rectangle:
    rows: frozenset
    cols: frozenset

    def __init__(self, rows, cols):
        object.__setattr__(self, "rows", frozenset(int(r) for r in rows))
        object.__setattr__(self, "cols", frozenset(int(c) for c in cols))

    @property
    def empty(self) -> bool:
        return not self.rows or not self.cols

    @property
    def area(self) -> int:
        return len(self.rows) * len(self.cols)

    def cells(self):
        return [(r, c) for r in sorted(self.rows) for c in sorted(self.cols)]

    def to_json(self) -> dict:
        return {"rows": sorted(self.rows), "cols": sorted(self.cols)}


@dataclass(frozen=True)
class Partition:
    target: Matrix01
    rects: tuple

    def __init__(self, target: Matrix01, rects):
        object.__setattr__(self, "target", target)
        object.__setattr__(self, "rects", tuple(rects))

    def __len__(self):
        return len(self.rects)

    @property
    def size(self) -> int:
        return len(self.rects)

    def to_json(self, spec: Optional[BlockSpec] = None, complemented: Optional[bool] = None) -> dict:
        obj = {"rects": [r.to_json() for r in self.rects], "target": self.target.to_json()}
        if spec is not None:
            obj["spec"] = spec.to_json()
            obj["complemented"] = bool(complemented)
        return obj

    @classmethod
    def from_json(cls, obj, target: Optional[Matrix01] = None) -> "Partition":
        if target is None:
            target = Matrix01.from_json(obj["target"])
        rects = [Rectangle(r["rows"], r["cols"]) for r in obj["rects"]]
        return cls(target, rects)


class Verdict:
    """Truthy pass/fail result carrying the first failure and a witness."""

    __slots__ = ("ok", "reason", "cell", "item")

    def __init__(self, ok: bool, reason: str = "", cell=None, item=None):
        self.ok = ok
        self.reason = reason
        self.cell = cell
        self.item = item

    def __bool__(self):
        return self.ok

    def __repr__(self):
        if self.ok:
            return "Verdict(ok)"
        return f"Verdict(fail: {self.reason}, cell={self.cell}, item={self.item})"


def _cover_counts_match(target: Matrix01, rects: Sequence[Rectangle]) -> bool:
    """Fast path: the rectangle indicators multiply out to exactly the target."""
    R = np.zeros((len(rects), target.n_rows), dtype=np.int64)
    C = np.zeros((len(rects), target.n_cols), dtype=np.int64)
    for i, rect in enumerate(rects):
        R[i, list(rect.rows)] = 1
        C[i, list(rect.cols)] = 1
    return bool(np.array_equal(R.T @ C, target.to_dense()))


def _check_cover(target: Matrix01, rects: Sequence[Rectangle], allow_empty: bool) -> Verdict:
    for idx, rect in enumerate(rects):
        if rect.empty:
            if allow_empty:
                continue
            return Verdict(False, f"rectangle {idx} is empty")
        if max(rect.rows) >= target.n_rows or max(rect.cols) >= target.n_cols or min(rect.rows) < 0 or min(rect.cols) < 0:
            return Verdict(False, f"rectangle {idx} leaves the matrix")
    if _cover_counts_match(target, rects):
        return Verdict(True)
    # slow path to locate the first offending cell
    row_masks = target.row_masks()
    covered = [0] * target.n_rows
    for idx, rect in enumerate(rects):
        if rect.empty:
            continue
        colmask = 0
        for c in rect.cols:
            colmask |= 1 << c
        for r in sorted(rect.rows):
            bad = colmask & ~row_masks[r]
            if bad:
                c = (bad & -bad).bit_length() - 1
                return Verdict(False, f"rectangle {idx} covers a zero", (r, c))
            dup = covered[r] & colmask
            if dup:
                c = (dup & -dup).bit_length() - 1
                return Verdict(False, f"rectangle {idx} overlaps an earlier rectangle", (r, c))
            covered[r] |= colmask
    for r in range(target.n_rows):
        miss = row_masks[r] & ~covered[r]
        if miss:
            c = (miss & -miss).bit_length() - 1
            return Verdict(False, "one-entry not covered", (r, c))
    return Verdict(True)


def verify_partition(P: Partition) -> Verdict:
    """Check that the rectangles are nonempty, all-ones, disjoint, and cover every one."""
    return _check_cover(P.target, P.rects, allow_empty=False)


def row_partition(M: Matrix01) -> Partition:
    """One rectangle per group of identical nonzero rows."""
    groups = {}
    for i, mask in enumerate(M.row_masks()):
        if mask:
            groups.setdefault(mask, []).append(i)
    rects = []
    for mask, rows in groups.items():
        cols = [c for c in range(M.n_cols) if mask >> c & 1]
        rects.append(Rectangle(rows, cols))
    rects.sort(key=lambda r: min(r.rows))
    return Partition(M, rects)


# -------------------------------------------------------------- witnesses

@dataclass(frozen=True)
class MtrWitness:
    """Sets certifying membership of an ``n x n`` matrix in M(t, r)."""

    n: int
    t: int
    r: int
    A: tuple
    B: tuple
    L: frozenset
    Ls: tuple

    def rectangles(self):
        return [Rectangle(a, b) for a, b in zip(self.A, self.B)]

    def shifted_columns(self, shift: int) -> "MtrWitness":
        """Same witness after the cyclic column relabelling ``j -> j + shift (mod n)``."""
        B = tuple(frozenset((b + shift) % self.n for b in bs) for bs in self.B)
        return MtrWitness(self.n, self.t, self.r, self.A, B, self.L, self.Ls)


def dinm_witness(n: int, k: int) -> MtrWitness:
    """Witness that ``D(n, k)`` lies in M(n, d - 1), ``d = gcd(n, k)``.

    ``B_l`` is the run of ``d`` cyclically consecutive columns starting at
    ``l``; row ``i`` (support ``i .. i+n-k-1``) splits greedily into
    ``B_i, B_{i+d}, ...``, and ``A_l`` collects the rows using ``B_l``.
    """
    if not n > k > 0:
        raise ValueError(f"dinm_witness needs n > k > 0 (got n={n}, k={k}); use trivial_witness")
    d = math.gcd(n, k)
    B = tuple(frozenset((l + j) % n for j in range(d)) for l in range(n))
    A_sets = [set() for _ in range(n)]
    for i in range(n):
        for j in range((n - k) // d):
            A_sets[(i + j * d) % n].add(i)
    A = tuple(frozenset(a) for a in A_sets)
    L = frozenset(l for l in range(d - 1, n) if l % d == d - 1)
    Ls = tuple(frozenset(l for l in range(d - 1, n) if l % d == s and l != s) for s in range(d - 1))
    return MtrWitness(n=n, t=n, r=d - 1, A=A, B=B, L=L, Ls=Ls)


def trivial_witness(n: int, all_one: bool) -> MtrWitness:
    """M(1, 0) witness for the all-one ``D(n, 0)`` or the zero ``D(n, n)``.

    The zero case uses ``A_1 = {}`` and ``B_1 = [n]``: the rectangle covers no
    cell, and ``B_1`` partitions the columns as item 3 of the definition needs.
    """
    if n < 1:
        raise ValueError("n must be positive")
    full = frozenset(range(n))
    A = (full if all_one else frozenset(),)
    return MtrWitness(n=n, t=1, r=0, A=A, B=(full,), L=frozenset({0}), Ls=())


def _is_partition_of(sets, universe: frozenset) -> bool:
    seen = set()
    for s in sets:
        if seen & s:
            return False
        seen |= s
    return seen == universe


def verify_mtr(M: Matrix01, w: MtrWitness) -> Verdict:
    """Check items 1-4 of the M(t, r) definition; ``item`` names the failing one."""
    if M.n_rows != w.n or M.n_cols != w.n:
        return Verdict(False, "matrix size does not match witness", item=0)
    if not w.t > w.r >= 0 or len(w.A) != w.t or len(w.B) != w.t or len(w.Ls) != w.r:
        return Verdict(False, "inconsistent t, r or set counts", item=0)
    if any(not (0 <= x < w.n) for s in (*w.A, *w.B) for x in s):
        return Verdict(False, "index outside [n]", item=0)
    cover = _check_cover(M, w.rectangles(), allow_empty=True)
    if not cover:
        return Verdict(False, cover.reason, cover.cell, item=1)
    for s in range(w.r):
        for s2 in range(s):
            common = w.A[s] & w.A[s2]
            if common:
                return Verdict(False, f"special row sets {s2} and {s} intersect", (min(common), None), item=2)
    full = frozenset(range(w.n))
    non_special = set(range(w.r, w.t))
    if not w.L <= non_special or not _is_partition_of([w.B[l] for l in w.L], full):
        return Verdict(False, "column sets indexed by L do not partition [n]", item=3)
    for s in range(w.r):
        if not w.Ls[s] <= non_special or not _is_partition_of([w.B[l] for l in w.Ls[s]], full - w.B[s]):
            return Verdict(False, f"column sets indexed by L_{s} do not partition [n] minus B_{s}", item=4)
    return Verdict(True)


# ------------------------------------------------------------------ merging

def merge_construct(diag, check: bool = True, check_inputs: bool = True) -> Partition:
    """Partition the ones of the block matrix with the given diagonal blocks and ones elsewhere.

    ``diag`` is a list of ``(block_matrix, witness)`` pairs.  The result has
    ``sum(t_i - r_i) + max r_i`` rectangles, minus any that come out empty.
    """
    blocks = list(diag)
    if not blocks:
        raise ValueError("need at least one diagonal block")
    for idx, (Mi, wi) in enumerate(blocks if check_inputs else ()):
        v = verify_mtr(Mi, wi)
        if not v:
            raise ValueError(f"witness for block {idx} is invalid: {v.reason} (item {v.item})")
    sizes = [w.n for _, w in blocks]
    offsets = np.concatenate([[0], np.cumsum(sizes)]).tolist()
    n = offsets[-1]
    dense = np.ones((n, n), dtype=np.uint8)
    for (Mi, _), off in zip(blocks, offsets):
        dense[off:off + Mi.n_rows, off:off + Mi.n_cols] = Mi.to_dense()
    target = Matrix01.from_dense(dense)

    ws = [w for _, w in blocks]
    rmax = max(w.r for w in ws)
    rects = []
    for s in range(rmax):
        F = [i for i, w in enumerate(ws) if s < w.r]
        rows = {offsets[i] + a for i in F for a in ws[i].A[s]}
        cols = {offsets[j] + b for j in F for b in ws[j].B[s]}
        rects.append(Rectangle(rows, cols))

    # special label owning each row: row (j, j') -> s with j' in A_s^(j), s < r_j
    special_of = []
    for j, w in enumerate(ws):
        owner = [None] * w.n
        for s in range(w.r):
            for a in w.A[s]:
                if owner[a] is not None:
                    raise ValueError(f"block {j}: row {a} lies in two special row sets")
                owner[a] = s
        special_of.append(owner)

    for i, w in enumerate(ws):
        extra = {l: [] for l in range(w.r, w.t)}
        for j, wj in enumerate(ws):
            if j == i:
                continue
            for jr in range(wj.n):
                s = special_of[j][jr]
                labels = w.Ls[s] if (s is not None and s < w.r) else w.L
                for l in labels:
                    extra[l].append(offsets[j] + jr)
        for l in range(w.r, w.t):
            rows = [offsets[i] + a for a in w.A[l]] + extra[l]
            cols = [offsets[i] + b for b in w.B[l]]
            rects.append(Rectangle(rows, cols))

    rects = [r for r in rects if not r.empty]
    P = Partition(target, rects)
    if check:
        v = verify_partition(P)
        if not v:
            raise AssertionError(f"merge construction produced an invalid partition: {v}")
    return P


def merge_bound(witnesses) -> int:
    ws = list(witnesses)
    return sum(w.t - w.r for w in ws) + max(w.r for w in ws)


def complement_block_witness(n: int, k: int) -> MtrWitness:
    """Witness for the complement of ``D(n, n-k)`` (``k`` zeros per row, ``k > 0``).

    For ``n > k`` that complement is ``D(n, k)`` with columns rotated by ``k``,
    so the ``D(n, k)`` witness is used with its column sets rotated.
    """
    if k == n:
        return trivial_witness(n, all_one=False)
    return dinm_witness(n, k).shifted_columns(k)


@lru_cache(maxsize=4096)
def _complement_block(n: int, k: int):
    block = complement(build_D(n, n - k))
    w = complement_block_witness(n, k)
    v = verify_mtr(block, w)
    if not v:
        raise AssertionError(f"complement block witness ({n}, {k}) is invalid: {v}")
    return block, w


def complement_partition(spec: BlockSpec, check: bool = True) -> Partition:
    """Partition of the complement of the circulant block diagonal matrix of ``spec``.

    Size at most ``rank + max(d_hat) - 1``.
    """
    if any(k == 0 for k in spec.ks):
        raise ValueError("complement_partition needs k_i > 0 in every block")
    diag = [_complement_block(n, k) for n, k in spec.blocks]
    return merge_construct(diag, check=check, check_inputs=False)


def gap_family(k: int, r: int) -> BlockSpec:
    """``(k; 2k x l, k x t)`` with ``r = 2k*l + t``, ``0 <= t < 2k``.

    The matrix has binary rank ``r`` while its complement has binary rank at
    most ``ceil((k+1) r / 2k) + 2k - 3``.
    """
    if k < 2:
        raise ValueError("gap_family needs k >= 2")
    if r < 2 * k:
        raise ValueError(f"gap_family needs r >= 2k (got r={r}, k={k})")
    ell, t = divmod(r, 2 * k)
    return BlockSpec.common(k, [2 * k] * ell + [k] * t)


def gap_family_bound(k: int, r: int) -> int:
    return -(-(k + 1) * r // (2 * k)) + 2 * k - 3
