"""Exact binary rank by branch and bound.

The search covers the first uncovered one-cell with every admissible
rectangle, so each partition is generated once (rectangles are implicitly
numbered by their first cell, which is the canonical class-opening order).
A node with budget ``b`` and uncovered matrix ``U`` is pruned when
``max(rank(U), isolation(U)) > b``.  When the slack ``b - rank(U)`` is 0 or 1
the rectangle indicators are further restricted: with slack 0 every remaining
rectangle must have its row indicator in the column space of ``U`` and its
column indicator in the row space; with slack 1 at least one of the two.
"""

from __future__ import annotations

import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import kernels
from .construction import Partition, Rectangle, row_partition, verify_partition
from .matrix import Matrix01
from .rank import modular_rank, primes_needed

MAX_SOLVER_DIM = 64


@dataclass(frozen=True)
class SearchConfig:
    max_rects: Optional[int] = None
    time_budget: Optional[float] = None
    cell_order: str = "greedy"
    threads: int = 1
    table_limit: int = 2_000_000

    def __post_init__(self):
        if self.max_rects is not None and self.max_rects < 1:
            raise ValueError("max_rects must be positive")
        if self.time_budget is not None and self.time_budget <= 0:
            raise ValueError("time_budget must be positive")
        if self.cell_order not in ("fixed", "greedy"):
            raise ValueError("cell_order must be 'fixed' or 'greedy'")
        if self.threads < 1:
            raise ValueError("threads must be >= 1")

    @classmethod
    def from_env(cls, **kw) -> "SearchConfig":
        if "time_budget" not in kw and os.environ.get("BINRANK_BUDGET"):
            kw["time_budget"] = float(os.environ["BINRANK_BUDGET"])
        return cls(**kw)


@dataclass
class SolveResult:
    exact: Optional[int]
    lower: int
    upper: int
    witness: Partition
    nodes: int = 0
    elapsed: float = 0.0
    timed_out: bool = False

    def to_json(self) -> dict:
        return {
            "exact": self.exact,
            "lower": self.lower,
            "upper": self.upper,
            "witness": {"rects": [r.to_json() for r in self.witness.rects]},
        }


class _Timeout(Exception):
    pass


# ------------------------------------------------------------ isolation sets

def _isolation_orders(n_rows, n_cols, cells, row_deg, col_deg):
    diag_first = sorted(cells, key=lambda rc: (rc[0] != rc[1], rc))
    by_degree = sorted(cells, key=lambda rc: (row_deg[rc[0]] + col_deg[rc[1]], rc))
    return [diag_first, cells, by_degree]


def _greedy_isolation_py(masks, order):
    chosen = []
    for a, b in order:
        if not masks[a] >> b & 1:
            continue
        if all(a != c and b != d and not (masks[a] >> d & 1 and masks[c] >> b & 1) for c, d in chosen):
            chosen.append((a, b))
    return chosen


def isolation_set(M: Matrix01) -> frozenset:
    """Greedy isolation set: one-cells no two of which share an all-ones rectangle.

    Several fixed greedy orders are tried (diagonal first, row-major,
    low-degree first) and the largest result is kept.
    """
    cells = M.one_cells()
    if not cells:
        return frozenset()
    orders = _isolation_orders(M.n_rows, M.n_cols, cells, M.row_sums(), M.col_sums())
    best = []
    if M.n_cols <= 64:
        rows = M.words[:, 0].copy()
        for order in orders:
            arr = np.asarray(order, dtype=np.int64)
            sr, sc = kernels.isolation_greedy(rows, arr[:, 0].copy(), arr[:, 1].copy())
            if len(sr) > len(best):
                best = list(zip(sr.tolist(), sc.tolist()))
    else:
        masks = M.row_masks()
        for order in orders:
            got = _greedy_isolation_py(masks, order)
            if len(got) > len(best):
                best = got
    return frozenset(best)


def is_isolation_set(M: Matrix01, cells) -> bool:
    cells = list(cells)
    for x, (a, b) in enumerate(cells):
        if not M[a, b]:
            return False
        for c, d in cells[:x]:
            if a == c or b == d or (M[a, d] and M[c, b]):
                return False
    return True


def isolation_lower_bound(M: Matrix01) -> int:
    return len(isolation_set(M))


# -------------------------------------------------------------- reduction

def _reduce(M: Matrix01):
    """Drop zero rows/columns and merge duplicates; binary rank is unchanged."""
    dense = M.to_dense()
    row_groups = {}
    for i, row in enumerate(dense):
        if row.any():
            row_groups.setdefault(row.tobytes(), []).append(i)
    rgroups = sorted(row_groups.values())
    sub = dense[[g[0] for g in rgroups]] if rgroups else dense[:0]
    col_groups = {}
    for j in range(dense.shape[1]):
        col = sub[:, j]
        if col.any():
            col_groups.setdefault(col.tobytes(), []).append(j)
    cgroups = sorted(col_groups.values())
    if not rgroups:
        return None, [], []
    red = sub[:, [g[0] for g in cgroups]]
    return red, rgroups, cgroups


def _submasks_with(mask: int, must: int):
    """All submasks of ``mask`` that contain the bits of ``must``."""
    free = mask & ~must
    sub = free
    out = []
    while True:
        out.append(sub | must)
        if sub == 0:
            break
        sub = (sub - 1) & free
    return out


def _popcount(x: int) -> int:
    return bin(x).count("1")


class _Search:
    def __init__(self, dense: np.ndarray, cfg: SearchConfig, deadline: Optional[float]):
        self.n_rows, self.n_cols = dense.shape
        self.cfg = cfg
        self.deadline = deadline
        self.nodes = 0
        self.table = {}
        self.exact_spaces = primes_needed(min(self.n_rows, self.n_cols) + 1) == 1
        self.p = kernels.DEFAULT_PRIME
        row_deg = dense.sum(axis=1, dtype=np.int64).tolist()
        col_deg = dense.sum(axis=0, dtype=np.int64).tolist()
        # fixed order: descending row degree, then column degree, ties by index
        self.row_order = sorted(range(self.n_rows), key=lambda r: (-row_deg[r], r))
        self.row_rank = {r: i for i, r in enumerate(self.row_order)}
        self.col_order = sorted(range(self.n_cols), key=lambda c: (-col_deg[c], c))

    # -- linear algebra on a node ---------------------------------------
    def _dense(self, U):
        return kernels.unpack_masks(np.array(U, dtype=np.uint64), self.n_cols)

    def _rank(self, mat):
        return int(kernels.rank_mod(mat, self.p))

    def _iso(self, U):
        rows_arr = np.array(U, dtype=np.uint64)
        cr, cc = [], []
        for r in range(self.n_rows):
            m = U[r]
            while m:
                low = m & -m
                cr.append(r)
                cc.append(low.bit_length() - 1)
                m ^= low
        sr, _ = kernels.isolation_greedy(rows_arr, np.array(cr, dtype=np.int64), np.array(cc, dtype=np.int64))
        return len(sr)

    # -- node evaluation ---------------------------------------------------
    def _check_time(self):
        self.nodes += 1
        if self.deadline is not None and (self.nodes & 63) == 0 and time.monotonic() > self.deadline:
            raise _Timeout()

    def _bound(self, U, budget):
        """Return (slack, dense) or None if the node is infeasible."""
        mat = self._dense(U)
        r = self._rank(mat)
        if r > budget:
            return None
        if budget - r <= 1 or budget < len(U):
            if self._iso(U) > budget:
                return None
        return budget - r, mat

    def _pick_cell(self, U):
        """First uncovered cell in the fixed degree order."""
        a = min((r for r in range(self.n_rows) if U[r]), key=self.row_rank.__getitem__)
        b = next(c for c in self.col_order if U[a] >> c & 1)
        return a, b

    def _candidates(self, U, slack, mat):
        if self.cfg.cell_order == "fixed":
            return self._candidates_fixed(U, slack, mat)
        restrict = self.exact_spaces and slack <= 1
        mode = (2 if slack == 0 else 1) if restrict else 0
        if restrict:
            rnull = kernels.nullspace_mod(mat, self.p)
            cnull = kernels.nullspace_mod(np.ascontiguousarray(mat.T), self.p)
        else:
            rnull = np.zeros((0, self.n_cols), dtype=np.int64)
            cnull = np.zeros((0, self.n_rows), dtype=np.int64)
        Uarr = np.array(U, dtype=np.uint64)
        # most constrained cell: fewest admissible rectangles, ties by scan order
        best, best_cell = 1 << 62, None
        for r in self.row_order:
            m = U[r]
            for c in self.col_order:
                if not m >> c & 1:
                    continue
                cnt, _, _ = kernels.cell_rects(Uarr, r, c, rnull, cnull, self.p, mode, best, False)
                if cnt == 0:
                    return []
                if cnt < best:
                    best, best_cell = cnt, (r, c)
                    if cnt == 1:
                        break
            if best == 1:
                break
        a, b = best_cell
        _, As, Bs = kernels.cell_rects(Uarr, a, b, rnull, cnull, self.p, mode, best, True)
        out = sorted(((-_popcount(A) * _popcount(B), A, B) for A, B in zip(As.tolist(), Bs.tolist())))
        return [(A, B) for _, A, B in out]

    def _candidates_fixed(self, U, slack, mat):
        a, b = self._pick_cell(U)
        Bs = _submasks_with(U[a], 1 << b)
        restrict = self.exact_spaces and slack <= 1
        if restrict:
            row_null = kernels.nullspace_mod(mat, self.p)
            col_null = kernels.nullspace_mod(np.ascontiguousarray(mat.T), self.p)
            B_ok = kernels.masks_in_span(np.array(Bs, dtype=np.uint64), row_null, self.p)
            if slack == 0:
                Bs = [B for B, ok in zip(Bs, B_ok) if ok]
                B_ok = [True] * len(Bs)
        out = []
        for idx, B in enumerate(Bs):
            rows = 0
            for r in range(self.n_rows):
                if U[r] & B == B:
                    rows |= 1 << r
            As = _submasks_with(rows, 1 << a)
            if restrict and not B_ok[idx]:
                A_ok = kernels.masks_in_span(np.array(As, dtype=np.uint64), col_null, self.p)
                As = [A for A, ok in zip(As, A_ok) if ok]
            elif restrict and slack == 0:
                A_ok = kernels.masks_in_span(np.array(As, dtype=np.uint64), col_null, self.p)
                As = [A for A, ok in zip(As, A_ok) if ok]
            nb = _popcount(B)
            for A in As:
                out.append((-_popcount(A) * nb, A, B))
        out.sort()
        return [(A, B) for _, A, B in out]

    @staticmethod
    def _remove(U, A, B):
        V = list(U)
        m = A
        while m:
            low = m & -m
            V[low.bit_length() - 1] &= ~B
            m ^= low
        return tuple(V)

    def expand(self, U, budget):
        """Children ``(rect, U')`` of a feasible node, in search order, or None if pruned."""
        if budget <= 0:
            return None
        res = self._bound(U, budget)
        if res is None:
            return None
        slack, mat = res
        return [((A, B), self._remove(U, A, B)) for A, B in self._candidates(U, slack, mat)]

    def dfs(self, U, budget):
        """Rectangles (as mask pairs) partitioning ``U`` within ``budget``, or None."""
        if not any(U):
            return []
        self._check_time()
        if budget <= 0:
            return None
        seen = self.table.get(U)
        if seen is not None and seen >= budget:
            return None
        children = self.expand(U, budget)
        if children:
            for rect, V in children:
                sub = self.dfs(V, budget - 1)
                if sub is not None:
                    return [rect] + sub
        if len(self.table) < self.cfg.table_limit:
            self.table[U] = max(budget, self.table.get(U, -1))
        return None


def _frontier(search: _Search, U, budget, depth):
    """Lexicographically ordered subproblems ``(path, U, budget)`` at ``depth`` levels down."""
    if depth == 0 or not any(U):
        return [([], U, budget)]
    children = search.expand(U, budget)
    if not children:
        return []
    out = []
    for rect, V in children:
        for path, W, b in _frontier(search, V, budget - 1, depth - 1):
            out.append(([rect] + path, W, b))
    return out


def _solve_target(dense, U0, t, cfg, deadline, shared: _Search):
    """Return (list of mask rectangles or None, node count)."""
    if cfg.threads <= 1:
        before = shared.nodes
        return shared.dfs(U0, t), shared.nodes - before
    tasks = _frontier(shared, U0, t, 2)
    if not tasks:
        return None, 0

    def run(task):
        path, W, b = task
        worker = _Search(dense, cfg, deadline)
        try:
            sub = worker.dfs(W, b)
        except _Timeout:
            return "timeout", worker.nodes
        return (None if sub is None else path + sub), worker.nodes

    with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
        results = list(pool.map(run, tasks))
    nodes = sum(n for _, n in results)
    for sol, _ in results:
        if sol == "timeout":
            raise _Timeout()
        if sol is not None:
            return sol, nodes
    return None, nodes


def _lift(M: Matrix01, rects_masks, rgroups, cgroups, row_of, col_of) -> Partition:
    rects = []
    for A, B in rects_masks:
        rows = [r for i in range(len(row_of)) if A >> i & 1 for r in rgroups[row_of[i]]]
        cols = [c for j in range(len(col_of)) if B >> j & 1 for c in cgroups[col_of[j]]]
        rects.append(Rectangle(rows, cols))
    rects.sort(key=lambda R: (min(R.rows), min(R.cols)))
    return Partition(M, rects)


def binary_rank_exact(M: Matrix01, cfg: Optional[SearchConfig] = None,
                      upper_hint: Optional[Partition] = None) -> SolveResult:
    """Exact binary rank with a witness partition.

    Targets ``t`` are tried upward from ``max(real rank, isolation bound)``.
    If the time budget runs out, ``exact`` is None and ``[lower, upper]`` is a
    proven bracket with ``witness`` of size ``upper``.
    """
    cfg = cfg or SearchConfig()
    start = time.monotonic()
    deadline = start + cfg.time_budget if cfg.time_budget is not None else None

    best = row_partition(M)
    col_alt = row_partition(M.T)
    if len(col_alt) < len(best):
        best = Partition(M, [Rectangle(R.cols, R.rows) for R in col_alt.rects])
    if upper_hint is not None:
        if upper_hint.target != M or not verify_partition(upper_hint):
            raise ValueError("upper_hint is not a valid partition of M")
        if len(upper_hint) < len(best):
            best = upper_hint

    red, rgroups, cgroups = _reduce(M)
    if red is None:
        return SolveResult(0, 0, 0, Partition(M, []), 0, time.monotonic() - start)
    if red.shape[1] > MAX_SOLVER_DIM:
        if red.shape[0] > MAX_SOLVER_DIM:
            raise ValueError("matrix too large for the exact solver (more than 64 distinct rows and columns)")
        # work on the transpose, swap back at the end
        res = binary_rank_exact(M.T, cfg, None if upper_hint is None else
                                Partition(M.T, [Rectangle(R.cols, R.rows) for R in best.rects]))
        res.witness = Partition(M, [Rectangle(R.cols, R.rows) for R in res.witness.rects])
        return res

    Mred = Matrix01.from_dense(red)
    lower = max(modular_rank(red), isolation_lower_bound(Mred))
    upper = len(best)
    search = _Search(red, cfg, deadline)
    U0 = tuple(Mred.row_masks())
    cap = upper - 1 if cfg.max_rects is None else min(upper - 1, cfg.max_rects)
    t = lower
    timed_out = False
    try:
        while t <= cap:
            sol, _ = _solve_target(red, U0, t, cfg, deadline, search)
            if sol is not None:
                best = _lift(M, sol, rgroups, cgroups, list(range(len(rgroups))), list(range(len(cgroups))))
                upper = len(best)
                break
            t += 1
            lower = t
    except _Timeout:
        timed_out = True
    lower = min(lower, upper)
    exact = upper if lower == upper else None
    return SolveResult(exact, lower, upper, best, search.nodes, time.monotonic() - start, timed_out)
