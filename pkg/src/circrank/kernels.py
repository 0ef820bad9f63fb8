"""Hot numeric kernels with a numba path and a vectorised numpy path.

All modular routines take int64 matrices with entries in ``[0, p)`` and a prime
``p < 2**31`` so every product fits in a signed 64-bit word.  Row masks are
``uint64`` with bit ``j`` standing for column ``j`` (so at most 64 columns).
"""

import numpy as np

from ._accel import USE_NUMBA, njit

# Largest primes below 2**31, checked in the test-suite.
PRIMES = (
    2147483647,
    2147483629,
    2147483587,
    2147483579,
    2147483563,
    2147483549,
    2147483543,
    2147483497,
)
DEFAULT_PRIME = PRIMES[0]


@njit
def _powmod(a, e, p):
    result = 1
    a %= p
    while e > 0:
        if e & 1:
            result = (result * a) % p
        a = (a * a) % p
        e >>= 1
    return result


# ---------------------------------------------------------------- rank mod p

@njit
def _rank_mod_loops(mat, p):
    a = mat.copy()
    n_rows, n_cols = a.shape
    rank = 0
    for col in range(n_cols):
        if rank == n_rows:
            break
        piv = -1
        for r in range(rank, n_rows):
            if a[r, col] != 0:
                piv = r
                break
        if piv < 0:
            continue
        if piv != rank:
            for c in range(col, n_cols):
                tmp = a[piv, c]
                a[piv, c] = a[rank, c]
                a[rank, c] = tmp
        inv = _powmod(a[rank, col], p - 2, p)
        for c in range(col, n_cols):
            a[rank, c] = (a[rank, c] * inv) % p
        for r in range(rank + 1, n_rows):
            f = a[r, col]
            if f != 0:
                for c in range(col, n_cols):
                    a[r, c] = (a[r, c] - f * a[rank, c]) % p
        rank += 1
    return rank


def _rank_mod_numpy(mat, p):
    a = np.array(mat, dtype=np.int64) % p
    n_rows, n_cols = a.shape
    rank = 0
    for col in range(n_cols):
        if rank == n_rows:
            break
        nz = np.flatnonzero(a[rank:, col])
        if nz.size == 0:
            continue
        piv = rank + int(nz[0])
        if piv != rank:
            a[[rank, piv]] = a[[piv, rank]]
        inv = pow(int(a[rank, col]), p - 2, p)
        a[rank] = (a[rank] * inv) % p
        below = a[rank + 1:, col].copy()
        if below.any():
            a[rank + 1:] = (a[rank + 1:] - below[:, None] * a[rank]) % p
        rank += 1
    return rank


# ------------------------------------------------------- null space mod p

@njit
def _nullspace_mod_loops(mat, p):
    a = mat.copy()
    n_rows, n_cols = a.shape
    pivots = np.full(n_cols, -1, dtype=np.int64)
    rank = 0
    for col in range(n_cols):
        if rank == n_rows:
            break
        piv = -1
        for r in range(rank, n_rows):
            if a[r, col] != 0:
                piv = r
                break
        if piv < 0:
            continue
        if piv != rank:
            for c in range(n_cols):
                tmp = a[piv, c]
                a[piv, c] = a[rank, c]
                a[rank, c] = tmp
        inv = _powmod(a[rank, col], p - 2, p)
        for c in range(n_cols):
            a[rank, c] = (a[rank, c] * inv) % p
        for r in range(n_rows):
            if r != rank:
                f = a[r, col]
                if f != 0:
                    for c in range(n_cols):
                        a[r, c] = (a[r, c] - f * a[rank, c]) % p
        pivots[col] = rank
        rank += 1
    out = np.zeros((n_cols - rank, n_cols), dtype=np.int64)
    k = 0
    for free in range(n_cols):
        if pivots[free] >= 0:
            continue
        out[k, free] = 1
        for col in range(n_cols):
            r = pivots[col]
            if r >= 0:
                out[k, col] = (p - a[r, free]) % p
        k += 1
    return out


def _nullspace_mod_numpy(mat, p):
    a = np.array(mat, dtype=np.int64) % p
    n_rows, n_cols = a.shape
    pivot_row = {}
    rank = 0
    for col in range(n_cols):
        if rank == n_rows:
            break
        nz = np.flatnonzero(a[rank:, col])
        if nz.size == 0:
            continue
        piv = rank + int(nz[0])
        if piv != rank:
            a[[rank, piv]] = a[[piv, rank]]
        a[rank] = (a[rank] * pow(int(a[rank, col]), p - 2, p)) % p
        f = a[:, col].copy()
        f[rank] = 0
        a = (a - f[:, None] * a[rank]) % p
        pivot_row[col] = rank
        rank += 1
    free = [c for c in range(n_cols) if c not in pivot_row]
    out = np.zeros((len(free), n_cols), dtype=np.int64)
    if free:
        out[np.arange(len(free)), free] = 1
        for col, r in pivot_row.items():
            out[:, col] = (-a[r, free]) % p
    return out


# ------------------------------------------------ span membership of masks

@njit
def _masks_in_span_loops(masks, null, p):
    n = masks.shape[0]
    k, n_cols = null.shape
    out = np.ones(n, dtype=np.bool_)
    for i in range(n):
        m = masks[i]
        for q in range(k):
            s = 0
            for j in range(n_cols):
                if (m >> np.uint64(j)) & np.uint64(1):
                    s += null[q, j]
            if s % p != 0:
                out[i] = False
                break
    return out


def _masks_in_span_numpy(masks, null, p):
    masks = np.asarray(masks, dtype=np.uint64)
    n_cols = null.shape[1]
    if null.shape[0] == 0:
        return np.ones(masks.shape[0], dtype=bool)
    bits = ((masks[:, None] >> np.arange(n_cols, dtype=np.uint64)) & np.uint64(1)).astype(np.int64)
    # entries < 2**31 and at most 64 terms: the sum stays below 2**37
    return ~((bits @ null.T) % p).any(axis=1)


# ----------------------------------------------------- greedy isolation set

@njit
def _isolation_greedy_loops(rows, cell_r, cell_c):
    n = cell_r.shape[0]
    sel_r = np.empty(n, dtype=np.int64)
    sel_c = np.empty(n, dtype=np.int64)
    count = 0
    one = np.uint64(1)
    for t in range(n):
        a = cell_r[t]
        b = cell_c[t]
        if not (rows[a] >> np.uint64(b)) & one:
            continue
        ok = True
        for s in range(count):
            c = sel_r[s]
            d = sel_c[s]
            if a == c or b == d:
                ok = False
                break
            if (rows[a] >> np.uint64(d)) & one and (rows[c] >> np.uint64(b)) & one:
                ok = False
                break
        if ok:
            sel_r[count] = a
            sel_c[count] = b
            count += 1
    return sel_r[:count], sel_c[:count]


def _isolation_greedy_numpy(rows, cell_r, cell_c):
    rows = np.asarray(rows, dtype=np.uint64)
    n_cols = 64
    dense = ((rows[:, None] >> np.arange(n_cols, dtype=np.uint64)) & np.uint64(1)).astype(bool)
    sel_r, sel_c = [], []
    for a, b in zip(np.asarray(cell_r).tolist(), np.asarray(cell_c).tolist()):
        if not dense[a, b]:
            continue
        if sel_r:
            sr = np.array(sel_r)
            sc = np.array(sel_c)
            if (sr == a).any() or (sc == b).any():
                continue
            if (dense[a, sc] & dense[sr, b]).any():
                continue
        sel_r.append(a)
        sel_c.append(b)
    return np.array(sel_r, dtype=np.int64), np.array(sel_c, dtype=np.int64)


# ------------------------------------------- rectangles through one cell
#
# mode 0: every rectangle; 1: row or column indicator in the span;
# 2: both in the span.  ``rnull`` (k x n_cols) annihilates the row space of
# U, ``cnull`` (k' x n_rows) the column space.

@njit
def _span_zero(s):
    for q in range(s.shape[0]):
        if s[q] != 0:
            return False
    return True


@njit
def _cell_rects_loops(U, a, b, rnull, cnull, p, mode, stop, store):
    """Count rectangles of ones of ``U`` through ``(a, b)`` (stopping at ``stop``).

    With ``store`` the rectangles are also returned as mask arrays.
    """
    n_rows = U.shape[0]
    one = np.uint64(1)
    ra = U[a]
    must_b = one << np.uint64(b)
    free = ra & ~must_b
    fb = np.empty(64, dtype=np.int64)
    nf = 0
    for j in range(64):
        if (free >> np.uint64(j)) & one:
            fb[nf] = j
            nf += 1
    kr = rnull.shape[0]
    kc = cnull.shape[0]
    sB = np.zeros(kr, dtype=np.int64)
    for q in range(kr):
        sB[q] = rnull[q, b] % p
    cap = stop if store else 0
    outA = np.empty(max(cap, 1), dtype=np.uint64)
    outB = np.empty(max(cap, 1), dtype=np.uint64)
    count = 0
    B = must_b
    fr = np.empty(64, dtype=np.int64)
    sA = np.zeros(kc, dtype=np.int64)
    for i in range(1 << nf):
        if i > 0:
            # gray code step: toggle the lowest set bit of i
            t = 0
            while not (i >> t) & 1:
                t += 1
            j = fb[t]
            bit = one << np.uint64(j)
            if B & bit:
                B ^= bit
                for q in range(kr):
                    sB[q] = (sB[q] - rnull[q, j]) % p
            else:
                B |= bit
                for q in range(kr):
                    sB[q] = (sB[q] + rnull[q, j]) % p
        b_ok = _span_zero(sB)
        if mode == 2 and not b_ok:
            continue
        rows = np.uint64(0)
        nr = 0
        for r in range(n_rows):
            if r != a and (U[r] & B) == B:
                rows |= one << np.uint64(r)
                fr[nr] = r
                nr += 1
        need_a = mode == 2 or (mode == 1 and not b_ok)
        if not need_a and not store:
            count += 1 << nr
            if count >= stop:
                return count, outA[:0], outB[:0]
            continue
        A = one << np.uint64(a)
        for q in range(kc):
            sA[q] = cnull[q, a] % p
        for i2 in range(1 << nr):
            if i2 > 0:
                t = 0
                while not (i2 >> t) & 1:
                    t += 1
                r = fr[t]
                bit = one << np.uint64(r)
                if A & bit:
                    A ^= bit
                    for q in range(kc):
                        sA[q] = (sA[q] - cnull[q, r]) % p
                else:
                    A |= bit
                    for q in range(kc):
                        sA[q] = (sA[q] + cnull[q, r]) % p
            if need_a and not _span_zero(sA):
                continue
            if store:
                if count < cap:
                    outA[count] = A
                    outB[count] = B
            count += 1
            if count >= stop:
                return count, outA[:min(count, cap)], outB[:min(count, cap)]
    return count, outA[:min(count, cap)], outB[:min(count, cap)]


def _popcount_arr(x):
    return np.bitwise_count(np.asarray(x, dtype=np.uint64)).astype(np.int64)


def _cell_rects_numpy(U, a, b, rnull, cnull, p, mode, stop, store):
    U = np.asarray(U, dtype=np.uint64)
    n_rows = U.shape[0]
    one = np.uint64(1)
    free_bits = [j for j in range(64) if (int(U[a]) >> j) & 1 and j != b]
    combos = np.arange(1 << len(free_bits), dtype=np.uint64)
    Bs = np.full(combos.shape, one << np.uint64(b), dtype=np.uint64)
    for t, j in enumerate(free_bits):
        Bs |= ((combos >> np.uint64(t)) & one) << np.uint64(j)
    b_ok = _masks_in_span_numpy(Bs, rnull % p, p)
    contains = (U[None, :] & Bs[:, None]) == Bs[:, None]
    contains[:, a] = False
    As, Bo = [], []
    count = 0
    for idx in range(Bs.shape[0]):
        if mode == 2 and not b_ok[idx]:
            continue
        rows = np.flatnonzero(contains[idx])
        need_a = mode == 2 or (mode == 1 and not b_ok[idx])
        if not need_a and not store:
            count += 1 << rows.shape[0]
            if count >= stop:
                break
            continue
        sub = np.arange(1 << rows.shape[0], dtype=np.uint64)
        amask = np.full(sub.shape, one << np.uint64(a), dtype=np.uint64)
        for t, r in enumerate(rows.tolist()):
            amask |= ((sub >> np.uint64(t)) & one) << np.uint64(r)
        if need_a:
            amask = amask[_masks_in_span_numpy(amask, cnull % p, p)]
        take = amask[: max(stop - count, 0)]
        if store:
            As.extend(take.tolist())
            Bo.extend([int(Bs[idx])] * take.shape[0])
        count += take.shape[0]
        if count >= stop:
            break
    return count, np.array(As, dtype=np.uint64), np.array(Bo, dtype=np.uint64)


# ----------------------------------------------------------- public switch

def unpack_masks(masks, n_cols):
    """Expand ``uint64`` row masks to an int64 0/1 matrix with ``n_cols`` columns."""
    masks = np.asarray(masks, dtype=np.uint64)
    return ((masks[:, None] >> np.arange(n_cols, dtype=np.uint64)) & np.uint64(1)).astype(np.int64)


if USE_NUMBA:
    rank_mod = _rank_mod_loops
    nullspace_mod = _nullspace_mod_loops
    masks_in_span = _masks_in_span_loops
    isolation_greedy = _isolation_greedy_loops
    cell_rects = _cell_rects_loops
else:
    rank_mod = _rank_mod_numpy
    nullspace_mod = _nullspace_mod_numpy
    masks_in_span = _masks_in_span_numpy
    isolation_greedy = _isolation_greedy_numpy
    cell_rects = _cell_rects_numpy

BACKEND = "numba" if USE_NUMBA else "numpy"

__all__ = [
    "BACKEND",
    "cell_rects",
    "DEFAULT_PRIME",
    "PRIMES",
    "isolation_greedy",
    "masks_in_span",
    "nullspace_mod",
    "rank_mod",
    "unpack_masks",
]
