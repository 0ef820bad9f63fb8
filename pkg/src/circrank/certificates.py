"""Lower-bound certificates and theorem predicates for circulant block diagonal matrices.

Every claim concerns either the matrix ``M`` of a spec (``target="matrix"``)
or its complement (``target="complement"``).  Predicates fire only when their
hypotheses hold literally; otherwise the claim is reported as not applicable
with the failed hypothesis as the reason.

Claim ids
---------
real-rank           rank over the rationals (both sides)
row-partition       one rectangle per distinct row (matrix side)
isolation           every block all-one or with 0 < k_i <= ceil(n_i/2): exact sum
gcd-excess-upper    complement <= rank + max d_hat_i - 1
construction        size of the explicit merged partition
single-gap-block    some n_j = k_j + d_j with d_j > 1: complement >= rank + 1
k-divides-n         all k_i | n_i, some n_i > k_i > 1: complement >= rank + 1
common-divisor      common k, d = gcd(d_i) > 1, rank > n/d: complement >= rank + 1
equal-gcd           common k, all d_i = d > 1, some n_i > d: complement >= rank + 1
prime-gap           common k, every n_i > k, n - k prime: complement >= min(rank + 1, n)
single-circulant    one block, n > k > 0: >= min(rank + 1, n) on each side where defined
two-regular-range   2-regular: matrix = n - m_2, complement in {n - m_even, n - m_even + 1}
even-blocks-exact   2-regular, all sizes even, one > 2: complement = n - m + 1
odd-sum-exact       2-regular, n odd, n > 2 m_even + n_odd (n_odd - 2): complement = n - m_even + 1
three-quarter       2-regular with r = n - m_2 >= 4: complement >= ceil(3r/4) + 1
gap-family          (k; 2k x l, k x t): matrix = r, complement <= ceil((k+1) r / 2k) + 2k - 3
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from fractions import Fraction
from typing import Optional

import numpy as np

from .construction import Partition, Rectangle, gap_family_bound, complement_partition, verify_partition
from .matrix import BlockSpec, build_block_diagonal, complement
from .rank import bareiss_rank, formula_rank_spec, real_rank

THEOREM_IDS = (
    "real-rank",
    "row-partition",
    "isolation",
    "gcd-excess-upper",
    "construction",
    "single-gap-block",
    "k-divides-n",
    "common-divisor",
    "equal-gcd",
    "prime-gap",
    "single-circulant",
    "two-regular-range",
    "even-blocks-exact",
    "odd-sum-exact",
    "three-quarter",
    "gap-family",
    "lin-independence",
    "divisibility",
    "solver",
)


@dataclass(frozen=True)
class BlockSequence:
    block: int
    values: tuple

    @property
    def balanced(self) -> bool:
        return len(set(self.values)) <= 1


@dataclass(frozen=True)
class BoundClaim:
    kind: str
    value: int
    theorem: str
    applicable: bool
    reason: str = ""
    target: str = "complement"

    def __post_init__(self):
        if self.kind not in ("lower", "upper"):
            raise ValueError(f"kind must be 'lower' or 'upper', got {self.kind!r}")
        if self.value < 0:
            raise ValueError("claim value must be nonnegative")
        if self.theorem not in THEOREM_IDS:
            raise ValueError(f"unknown theorem id {self.theorem!r}")
        if self.target not in ("matrix", "complement"):
            raise ValueError("target must be 'matrix' or 'complement'")

    def to_json(self) -> dict:
        return asdict(self)


# ----------------------------------------------------------- sequences

def _block_counts(indices, spec: BlockSpec, i: int):
    n_i, k_i = spec.blocks[i - 1]
    if k_i == 0:
        raise ValueError(f"block {i} has k = 0; its residue classes are undefined")
    d = math.gcd(n_i, k_i)
    values = [0] * d
    rng = spec.block_range(i)
    for x in indices:
        if x in rng:
            j = x - rng.start + 1  # 1-based offset in the block
            values[(j - 1) % d] += 1
    return values


def row_sequence(R: Rectangle, spec: BlockSpec, i: int, axis: str = "rows") -> BlockSequence:
    """Counts of ``R``'s rows (or columns) in block ``i`` per residue class mod ``d_i``.

    Entry ``t - 1`` counts offsets ``j`` (1-based) with ``j = t (mod d_i)``.
    """
    if axis not in ("rows", "cols"):
        raise ValueError("axis must be 'rows' or 'cols'")
    indices = R.rows if axis == "rows" else R.cols
    return BlockSequence(i, tuple(_block_counts(indices, spec, i)))


def is_balanced(R: Rectangle, spec: BlockSpec, i: int, axis: str = "rows") -> bool:
    return row_sequence(R, spec, i, axis).balanced


def _require_complement_partition(P: Partition, spec: BlockSpec):
    if P.target != complement(build_block_diagonal(spec)):
        raise ValueError("partition target is not the complement of the spec's matrix")
    v = verify_partition(P)
    if not v:
        raise ValueError(f"not a valid partition: {v.reason}")


def lin_independence_bound(P: Partition, spec: BlockSpec, h: int, axis: str = "rows",
                           check: bool = True) -> BoundClaim:
    """``|P| >= rank + l`` from sequences independent together with the all-one vector.

    The independent subset is grown greedily in rectangle order, so ``l`` is
    sound but not necessarily the largest possible.
    """
    if check:
        _require_complement_partition(P, spec)
    d = spec.d[h - 1]
    basis = [[1] * d]
    for R in P.rects:
        seq = list(row_sequence(R, spec, h, axis).values)
        if bareiss_rank(basis + [seq]) > len(basis):
            basis.append(seq)
    ell = len(basis) - 1
    rr = real_rank(P.target)
    return BoundClaim("lower", rr + ell, "lin-independence", True,
                      f"block {h} {axis}: {ell} independent sequence(s)", "complement")


# ------------------------------------------------------------ divisibility

def _block_sizes(indices, spec: BlockSpec):
    sizes = [0] * spec.m
    for x in indices:
        sizes[spec.block_of(x) - 1] += 1
    return sizes


def rectangle_weight(R: Rectangle, spec: BlockSpec) -> Fraction:
    """``(sum |A_i| / k_i) * (sum |B_i| / k_i)`` in exact rationals."""
    if any(k == 0 for k in spec.ks):
        raise ValueError("weights need k_i > 0")
    a = _block_sizes(R.rows, spec)
    b = _block_sizes(R.cols, spec)
    return (sum(Fraction(x, k) for x, k in zip(a, spec.ks))
            * sum(Fraction(x, k) for x, k in zip(b, spec.ks)))


def weight_normaliser(spec: BlockSpec) -> Fraction:
    """``sum n_i / k_i - 1``."""
    return sum(Fraction(n, k) for n, k in spec.blocks) - 1


def partition_weight(P: Partition, spec: BlockSpec) -> Fraction:
    return sum((rectangle_weight(R, spec) for R in P.rects), Fraction(0))


def partition_weight_expected(spec: BlockSpec) -> Fraction:
    """What :func:`partition_weight` equals for every partition of the complement."""
    total = sum(Fraction(n, k) for n, k in spec.blocks)
    return total * (total - 1)


def _lattice_step(spec: BlockSpec) -> Fraction:
    """Generator ``g / K`` of ``{sum e_i d_i / k_i : e_i integers}``."""
    K = math.lcm(*spec.ks)
    g = math.gcd(*(d * K // k for d, k in zip(spec.d, spec.ks)))
    return Fraction(g, K)


def divides_condition(R: Rectangle, spec: BlockSpec) -> bool:
    """True when ``S`` is not ``e * N`` for any ``e`` in the lattice, i.e. the ``rank + 1`` bound applies.

    ``S`` is the rectangle weight and ``N`` the normaliser; the lattice of
    admissible ``e`` is ``(g / K) Z`` with ``K = lcm(k_i)`` and
    ``g = gcd(d_i K / k_i)``.  For ``N = 0`` only ``S = 0`` is representable.
    """
    if any(k == 0 for k in spec.ks):
        raise ValueError("divides_condition needs k_i > 0")
    S = rectangle_weight(R, spec)
    N = weight_normaliser(spec)
    if N == 0:
        return S != 0
    q = S / N / _lattice_step(spec)
    return q.denominator != 1


def lattice_box_bound(R: Rectangle, spec: BlockSpec) -> int:
    """A box half-width that always contains a representation when one exists.

    With ``c_i = d_i K / k_i`` and target ``E = K S / N``, reducing all but one
    coefficient modulo the others leaves every ``|e_i|`` below ``|E| + sum c_i``.
    """
    N = weight_normaliser(spec)
    if N == 0:
        return 0
    K = math.lcm(*spec.ks)
    E = rectangle_weight(R, spec) * K / N
    return math.ceil(abs(E)) + sum(d * K // k for d, k in zip(spec.d, spec.ks))


def lattice_representable_brute(R: Rectangle, spec: BlockSpec, bound: int = 20,
                                nonnegative: bool = False) -> bool:
    """Exhaustive search of ``e_i`` in ``[-bound, bound]`` (or ``[0, bound]``) for ``S = (sum e_i d_i / k_i) * N``.

    Integer form: with ``K = lcm(k_i)`` and ``c_i = d_i K / k_i`` look for
    ``sum e_i c_i = K S / N``.  All but the last coefficient are enumerated
    and the last is solved for exactly.
    """
    S = rectangle_weight(R, spec)
    N = weight_normaliser(spec)
    if N == 0:
        return S == 0
    K = math.lcm(*spec.ks)
    target = S * K / N
    if target.denominator != 1:
        return False
    E = target.numerator
    c = [d * K // k for d, k in zip(spec.d, spec.ks)]
    lo = 0 if nonnegative else -bound
    rng = np.arange(lo, bound + 1, dtype=np.int64)
    partial = np.zeros(1, dtype=np.int64)
    for ci in c[:-1]:
        partial = (partial[:, None] + rng[None, :] * ci).ravel()
        partial = np.unique(partial)
    rest = E - partial
    last = c[-1]
    ok = rest % last == 0
    e_last = rest[ok] // last
    return bool(((e_last >= lo) & (e_last <= bound)).any())


# ------------------------------------------------------------ theorems

def _is_prime(x: int) -> bool:
    if x < 2:
        return False
    f = 2
    while f * f <= x:
        if x % f == 0:
            return False
        f += 1
    return True


def _ceil_div(a: int, b: int) -> int:
    return -(-a // b)


def _rank_of(spec: BlockSpec) -> Optional[int]:
    """Real rank shared by the matrix and its complement; None for the all-one case."""
    if spec.m == 1 and spec.blocks[0][0] == spec.blocks[0][1]:
        return None
    return formula_rank_spec(spec)


def _gap_family_params(spec: BlockSpec):
    k = spec.common_k
    if k is None or k < 2:
        return None
    ell = sum(1 for n in spec.ns if n == 2 * k)
    t = sum(1 for n in spec.ns if n == k)
    if ell + t != spec.m or ell < 1 or t > 2 * k - 1:
        return None
    return k, 2 * k * ell + t


def theorem_bounds(spec: BlockSpec) -> list:
    """Evaluate every theorem predicate on ``spec``; returns claims for both sides."""
    claims = []

    def add(kind, value, theorem, ok, reason, target="complement"):
        claims.append(BoundClaim(kind, max(int(value), 0) if ok else 0, theorem, bool(ok), reason, target))

    n, m = spec.n, spec.m
    ns, ks, ds = spec.ns, spec.ks, spec.d

    # matrix side, valid for any spec
    row_ub = sum(0 if k == 0 else (1 if k == nn else nn) for nn, k in spec.blocks)
    add("upper", row_ub, "row-partition", True, "distinct nonzero rows", "matrix")
    iso_ok = all(k == nn or 0 < k <= _ceil_div(nn, 2) for nn, k in spec.blocks)
    iso_val = sum(1 if k == nn else nn for nn, k in spec.blocks)
    reason = "every block all-one or 0 < k_i <= ceil(n_i/2)" if iso_ok else "some block has k_i = 0 or k_i > ceil(n_i/2) with k_i < n_i"
    add("lower", iso_val, "isolation", iso_ok, reason, "matrix")
    add("upper", iso_val, "isolation", iso_ok, reason, "matrix")

    if any(k == 0 for k in ks):
        for th in ("real-rank", "gcd-excess-upper", "single-gap-block", "k-divides-n", "common-divisor",
                   "equal-gcd", "prime-gap", "single-circulant", "two-regular-range",
                   "even-blocks-exact", "odd-sum-exact", "three-quarter", "gap-family"):
            add("lower", 0, th, False, "some k_i = 0")
        return claims

    rr = _rank_of(spec)
    if rr is None:
        # the all-one matrix and the zero complement
        add("lower", 1, "real-rank", True, "all-one matrix", "matrix")
        add("upper", 1, "real-rank", True, "all-one matrix", "matrix")
        add("lower", 0, "real-rank", True, "zero complement")
        add("upper", 0, "real-rank", True, "zero complement")
        return claims

    add("lower", rr, "real-rank", True, "sum of n_i - gcd(n_i, k_i) + 1", "matrix")
    add("lower", rr, "real-rank", True, "sum of n_i - gcd(n_i, k_i) + 1")

    dmax = max(spec.d_hat)
    add("upper", rr + dmax - 1, "gcd-excess-upper", True, f"max d_hat = {dmax}")

    hit = [j for j, (nn, k) in enumerate(spec.blocks) if nn == k + ds[j] and ds[j] > 1]
    add("lower", rr + 1, "single-gap-block", bool(hit),
        f"block {hit[0] + 1} has n = k + d with d > 1" if hit else "no block with n_j = k_j + d_j and d_j > 1")

    divides = all(nn % k == 0 for nn, k in spec.blocks)
    strict = any(nn > k > 1 for nn, k in spec.blocks)
    add("lower", rr + 1, "k-divides-n", divides and strict,
        "k_i | n_i for all i and some n_i > k_i > 1" if divides and strict else
        ("some k_i does not divide n_i" if not divides else "no block with n_i > k_i > 1"))

    k = spec.common_k
    if k is None:
        for th in ("common-divisor", "equal-gcd", "prime-gap"):
            add("lower", 0, th, False, "block k_i differ")
    else:
        g = math.gcd(*ds)
        ok = g > 1 and rr * g > n
        add("lower", rr + 1, "common-divisor", ok,
            f"d = {g} divides every d_i and rank > n/d" if ok else
            (f"gcd of d_i is {g}" if g <= 1 else f"rank {rr} <= n/d = {Fraction(n, g)}"))
        same = len(set(ds)) == 1 and ds[0] > 1 and any(nn > ds[0] for nn in ns)
        add("lower", rr + 1, "equal-gcd", same,
            f"all d_i = {ds[0]} and some n_i > d" if same else "d_i not all equal to one d > 1 with some n_i > d")
        # the counting step needs distinct rows, so every block must have n_i > k
        pr = _is_prime(n - k) and all(nn > k for nn in ns)
        add("lower", min(rr + 1, n), "prime-gap", pr,
            f"n - k = {n - k} is prime and every n_i > k" if pr else
            (f"n - k = {n - k} is not prime" if not _is_prime(n - k) else "some n_i = k (repeated rows)"))

    if m == 1 and n > ks[0] > 0:
        add("lower", min(rr + 1, n), "single-circulant", True, "single block with n > k > 0")
        if ks[0] < n:
            add("lower", min(rr + 1, n), "single-circulant", True, "single block with n > n - k > 0", "matrix")
    else:
        add("lower", 0, "single-circulant", False, "more than one block" if m > 1 else "n = k")

    two_reg = k == 2 and all(nn >= 2 for nn in ns) and not (m == 1 and ns[0] == 2)
    m2 = sum(1 for nn in ns if nn == 2)
    m_even = sum(1 for nn in ns if nn % 2 == 0)
    if two_reg:
        add("lower", n - m2, "two-regular-range", True, "2-regular", "matrix")
        add("upper", n - m2, "two-regular-range", True, "2-regular", "matrix")
        add("lower", n - m_even, "two-regular-range", True, "2-regular")
        add("upper", n - m_even + 1, "two-regular-range", True, "2-regular")
        even_ok = m_even == m and any(nn > 2 for nn in ns)
        for kind in ("lower", "upper"):
            add(kind, n - m + 1, "even-blocks-exact", even_ok,
                "all n_i even and some n_i > 2" if even_ok else "not all n_i even, or all n_i = 2")
        n_odd = sum(nn for nn in ns if nn % 2)
        odd_ok = n % 2 == 1 and n > 2 * m_even + n_odd * (n_odd - 2)
        for kind in ("lower", "upper"):
            add(kind, n - m_even + 1, "odd-sum-exact", odd_ok,
                f"n odd and n > 2 m_even + n_odd (n_odd - 2) = {2 * m_even + n_odd * (n_odd - 2)}" if odd_ok
                else "n even or n <= 2 m_even + n_odd (n_odd - 2)")
        r = n - m2
        add("lower", _ceil_div(3 * r, 4) + 1, "three-quarter", r >= 4,
            f"binary rank r = {r}" + (" >= 4" if r >= 4 else " < 4"))
    else:
        for th in ("two-regular-range", "even-blocks-exact", "odd-sum-exact", "three-quarter"):
            add("lower", 0, th, False, "not 2-regular (or the all-one 2 x 2)")

    gp = _gap_family_params(spec)
    if gp is not None:
        gk, r = gp
        add("lower", r, "gap-family", True, f"gap family with k = {gk}, r = {r}", "matrix")
        add("upper", r, "gap-family", True, f"gap family with k = {gk}, r = {r}", "matrix")
        add("upper", gap_family_bound(gk, r), "gap-family", True, f"gap family with k = {gk}, r = {r}")
    else:
        add("upper", 0, "gap-family", False, "not of the form (k; 2k x l, k x t), l >= 1, t < 2k")
    return claims


# ------------------------------------------------------------ report

@dataclass
class RankReport:
    spec: BlockSpec
    complemented: bool
    real_rank: int
    claims: list
    lower: int
    upper: int
    exact: Optional[int] = None

    def to_json(self) -> dict:
        return {
            "spec": self.spec.to_json(),
            "complemented": self.complemented,
            "real_rank": self.real_rank,
            "claims": [c.to_json() for c in self.claims],
            "lower": self.lower,
            "upper": self.upper,
            "exact": self.exact,
        }


def best_bounds(spec: BlockSpec, complemented: bool = True, solve: bool = False,
                solver_cfg=None, size_cap: int = 16) -> RankReport:
    """Combine rank, theorem claims, the explicit partition and optionally the solver.

    ``solve`` runs the exact solver when ``n <= size_cap``; ``exact`` stays
    None if it is skipped or runs out of time.
    """
    from .solver import binary_rank_exact

    target = "complement" if complemented else "matrix"
    claims = [c for c in theorem_bounds(spec) if c.target == target]
    M = build_block_diagonal(spec)
    X = complement(M) if complemented else M
    rr = real_rank(X)
    hint = None
    if complemented and all(k > 0 for k in spec.ks):
        hint = complement_partition(spec)
        claims.append(BoundClaim("upper", len(hint), "construction", True, "merged block partition"))
    lowers = [c.value for c in claims if c.applicable and c.kind == "lower"] + [rr]
    uppers = [c.value for c in claims if c.applicable and c.kind == "upper"]
    lower = max(lowers)
    upper = min(uppers) if uppers else X.count_ones()
    if lower > upper:
        raise AssertionError(f"inconsistent bounds for {spec}: lower {lower} > upper {upper}")
    exact = lower if lower == upper else None
    if solve and exact is None and spec.n <= size_cap:
        res = binary_rank_exact(X, solver_cfg, upper_hint=hint)
        exact = res.exact
        if res.exact is not None:
            claims.append(BoundClaim("lower", res.exact, "solver", True, "exhaustive search", target))
            claims.append(BoundClaim("upper", res.exact, "solver", True, "exhaustive search", target))
            lower = upper = res.exact
    return RankReport(spec, complemented, rr, claims, lower, upper, exact)
