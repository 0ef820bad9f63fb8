"""Brute-force binary rank, kept free of any solver code.

Minimum set partition of the one-cells into blocks that are exactly all-ones
combinatorial rectangles, by memoised recursion on the set of uncovered cells.
"""

from functools import lru_cache
from itertools import combinations

from .matrix import Matrix01

MAX_ORACLE_ONES = 20


def _feasible_classes(cells, dense):
    """Bitmasks (over cell indices) of every nonempty all-ones rectangle."""
    index = {cell: i for i, cell in enumerate(cells)}
    support = {}
    for r, c in cells:
        support.setdefault(r, set()).add(c)
    rows = sorted(support)
    out = set()

    def grow(start, chosen, common):
        for x in range(start, len(rows)):
            r = rows[x]
            nxt = common & support[r] if chosen else set(support[r])
            if not nxt:
                continue
            A = chosen + [r]
            cols = sorted(nxt)
            for bsize in range(1, len(cols) + 1):
                for B in combinations(cols, bsize):
                    mask = 0
                    for a in A:
                        for c in B:
                            mask |= 1 << index[(a, c)]
                    out.add(mask)
            grow(x + 1, A, nxt)

    grow(0, [], set())
    return out


def brute_force_oracle(M: Matrix01) -> int:
    dense = M.to_dense().tolist()
    cells = [(r, c) for r, row in enumerate(dense) for c, v in enumerate(row) if v]
    if len(cells) > MAX_ORACLE_ONES:
        raise ValueError(f"oracle limited to {MAX_ORACLE_ONES} ones, matrix has {len(cells)}")
    if not cells:
        return 0
    classes = _feasible_classes(cells, dense)
    by_low = {}
    for mask in classes:
        low = (mask & -mask).bit_length() - 1
        by_low.setdefault(low, []).append(mask)

    @lru_cache(maxsize=None)
    def best(remaining):
        if remaining == 0:
            return 0
        low = (remaining & -remaining).bit_length() - 1
        result = len(cells)
        for mask in by_low.get(low, ()):
            if mask & remaining == mask:
                result = min(result, 1 + best(remaining & ~mask))
        return result

    return best((1 << len(cells)) - 1)
