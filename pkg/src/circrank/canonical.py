"""Recover (2; n_1, ..., n_m) block form from a permuted 2-regular matrix."""

from __future__ import annotations

from dataclasses import dataclass

from .matrix import BlockSpec, Matrix01, build_block_diagonal, is_k_regular, permute


@dataclass(frozen=True)
class CanonicalForm:
    sizes: tuple
    row_perm: tuple
    col_perm: tuple

    @property
    def spec(self) -> BlockSpec:
        return BlockSpec.common(2, list(self.sizes))

    def to_json(self) -> dict:
        return {"sizes": list(self.sizes), "row_perm": list(self.row_perm), "col_perm": list(self.col_perm)}


def _walk(start: int, row_cols, col_rows):
    """Rows and columns of the cycle through ``start``, in block order.

    Row ``j`` of the walk meets columns ``j`` and ``j + 1`` (mod length).
    """
    c0, c1 = row_cols[start]
    rows, cols = [start], [c0]
    r, c = start, c1
    while True:
        cols.append(c)
        nxt = [x for x in col_rows[c] if x != r]
        if len(nxt) != 1:
            raise ValueError(f"column {c} does not continue the cycle")
        r = nxt[0]
        if r == start:
            break
        rows.append(r)
        other = [x for x in row_cols[r] if x != c]
        if len(other) != 1:
            raise ValueError(f"row {r} does not continue the cycle")
        c = other[0]
    cols.pop()  # the walk closed back on c0's row; drop the repeated entry
    if cols[-1] == c0 or len(cols) != len(rows):
        raise ValueError(f"cycle through row {start} is malformed")
    return rows, cols


def canonicalize_2regular(M: Matrix01) -> CanonicalForm:
    """Permutations taking ``M`` to ``build_block_diagonal(2; sizes)``, largest block first."""
    if is_k_regular(M) != 2:
        raise ValueError("matrix is not 2-regular")
    dense = M.to_dense()
    n = M.n_rows
    row_cols = [tuple(sorted(int(c) for c in dense[r].nonzero()[0])) for r in range(n)]
    col_rows = [tuple(int(r) for r in dense[:, c].nonzero()[0]) for c in range(n)]

    seen = [False] * n
    comps = []
    for r in range(n):
        if seen[r]:
            continue
        rows, cols = _walk(r, row_cols, col_rows)
        for x in rows:
            if seen[x]:
                raise ValueError(f"row {x} visited twice")
            seen[x] = True
        comps.append((rows, cols))

    comps.sort(key=lambda rc: (-len(rc[0]), rc[0][0]))
    row_perm = tuple(x for rows, _ in comps for x in rows)
    col_perm = tuple(x for _, cols in comps for x in cols)
    form = CanonicalForm(tuple(len(rows) for rows, _ in comps), row_perm, col_perm)
    if permute(M, row_perm, col_perm) != build_block_diagonal(form.spec):
        raise ValueError("cycle walk did not reproduce the block form")
    return form
