"""0/1 matrices, block specifications and the circulant constructions.

Indices are 1-based wherever the API talks about a ``GlobalIndex`` (block,
offset) and 0-based everywhere else (flat positions, serialized files).
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Optional, Sequence

import numpy as np

WORD = 64


class MatrixFormatError(ValueError):
    """Malformed matrix or spec text; carries a 1-based line/column when known."""

    def __init__(self, message, line=None, column=None):
        where = ""
        if line is not None:
            where = f"line {line}" + (f", column {column}" if column is not None else "") + ": "
        super().__init__(where + message)
        self.line = line
        self.column = column


def _pack(dense: np.ndarray) -> np.ndarray:
    n_rows, n_cols = dense.shape
    n_words = (n_cols + WORD - 1) // WORD
    words = np.zeros((n_rows, n_words), dtype=np.uint64)
    bits = dense.astype(np.uint64)
    for w in range(n_words):
        chunk = bits[:, w * WORD:(w + 1) * WORD]
        shifts = np.arange(chunk.shape[1], dtype=np.uint64)
        words[:, w] = (chunk << shifts).sum(axis=1, dtype=np.uint64)
    return words


def _unpack(words: np.ndarray, n_cols: int) -> np.ndarray:
    n_rows, n_words = words.shape
    out = np.zeros((n_rows, n_words * WORD), dtype=np.uint8)
    shifts = np.arange(WORD, dtype=np.uint64)
    for w in range(n_words):
        out[:, w * WORD:(w + 1) * WORD] = (words[:, w:w + 1] >> shifts) & np.uint64(1)
    return out[:, :n_cols]


class Matrix01:
    """Immutable dense 0/1 matrix stored as bit-packed 64-bit rows.

    Bit ``j % 64`` of word ``j // 64`` in row ``i`` holds entry ``(i, j)``;
    padding bits past ``n_cols`` are always zero.
    """

    __slots__ = ("n_rows", "n_cols", "words", "_dense", "_t")

    def __init__(self, words: np.ndarray, n_cols: int):
        words = np.array(words, dtype=np.uint64, copy=True)
        if words.ndim != 2:
            raise ValueError("words must be a 2-D array")
        n_rows = words.shape[0]
        if n_rows < 1 or n_cols < 1:
            raise ValueError("a Matrix01 needs at least one row and one column")
        if words.shape[1] != (n_cols + WORD - 1) // WORD:
            raise ValueError("word count does not match n_cols")
        tail = n_cols % WORD
        if tail and (words[:, -1] >> np.uint64(tail)).any():
            raise ValueError("padding bits past n_cols must be zero")
        words.setflags(write=False)
        self.n_rows = n_rows
        self.n_cols = n_cols
        self.words = words
        self._dense = None
        self._t = None

    # -- construction --------------------------------------------------
    @classmethod
    def from_dense(cls, dense) -> "Matrix01":
        arr = np.asarray(dense)
        if arr.ndim != 2:
            raise ValueError("expected a 2-D array")
        if arr.size and (arr.min() < 0 or arr.max() > 1):
            raise ValueError("entries must be 0 or 1")
        dense = arr.astype(np.uint8)  # always a fresh copy
        out = cls(_pack(dense), arr.shape[1])
        dense.setflags(write=False)
        out._dense = dense
        return out

    @classmethod
    def zeros(cls, n_rows: int, n_cols: int) -> "Matrix01":
        return cls.from_dense(np.zeros((n_rows, n_cols), dtype=np.uint8))

    @classmethod
    def ones(cls, n_rows: int, n_cols: int) -> "Matrix01":
        return cls.from_dense(np.ones((n_rows, n_cols), dtype=np.uint8))

    @classmethod
    def identity(cls, n: int) -> "Matrix01":
        return cls.from_dense(np.eye(n, dtype=np.uint8))

    # -- access ----------------------------------------------------------
    def to_dense(self) -> np.ndarray:
        if self._dense is None:
            dense = _unpack(self.words, self.n_cols)
            dense.setflags(write=False)
            self._dense = dense
        return self._dense

    @property
    def shape(self):
        return (self.n_rows, self.n_cols)

    @property
    def T(self) -> "Matrix01":
        """Transpose, built on first use and cached."""
        if self._t is None:
            self._t = Matrix01.from_dense(self.to_dense().T)
        return self._t

    def __getitem__(self, idx):
        i, j = idx
        return int((self.words[i, j // WORD] >> np.uint64(j % WORD)) & np.uint64(1))

    def row_masks(self) -> list:
        """Rows as Python ints (bit ``j`` = column ``j``)."""
        out = []
        for row in self.words:
            v = 0
            for w, word in enumerate(row.tolist()):
                v |= int(word) << (WORD * w)
            out.append(v)
        return out

    def count_ones(self) -> int:
        return int(np.bitwise_count(self.words).sum())

    def row_sums(self) -> np.ndarray:
        return np.bitwise_count(self.words).sum(axis=1).astype(np.int64)

    def col_sums(self) -> np.ndarray:
        return self.to_dense().sum(axis=0).astype(np.int64)

    def one_cells(self) -> list:
        r, c = np.nonzero(self.to_dense())
        return list(zip(r.tolist(), c.tolist()))

    def __eq__(self, other):
        if not isinstance(other, Matrix01):
            return NotImplemented
        return self.shape == other.shape and np.array_equal(self.words, other.words)

    def __hash__(self):
        return hash((self.n_rows, self.n_cols, self.words.tobytes()))

    def __repr__(self):
        return f"Matrix01({self.n_rows}x{self.n_cols}, ones={self.count_ones()})"

    # -- serialization -----------------------------------------------------
    def to_text(self) -> str:
        lines = [f"{self.n_rows} {self.n_cols}"]
        for row in self.to_dense():
            lines.append("".join("1" if v else "0" for v in row))
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "Matrix01":
        lines = [ln.strip() for ln in text.strip().splitlines()]
        if not lines:
            raise MatrixFormatError("empty matrix file", line=1)
        header = lines[0].split()
        if len(header) != 2 or not all(h.isdigit() for h in header):
            raise MatrixFormatError("header must be 'R C'", line=1)
        n_rows, n_cols = int(header[0]), int(header[1])
        body = lines[1:]
        if len(body) != n_rows:
            raise MatrixFormatError(f"expected {n_rows} rows, found {len(body)}", line=len(lines) + 1)
        dense = np.zeros((n_rows, n_cols), dtype=np.uint8)
        for i, ln in enumerate(body):
            if len(ln) != n_cols:
                raise MatrixFormatError(f"expected {n_cols} characters, found {len(ln)}", line=i + 2)
            for j, ch in enumerate(ln):
                if ch not in "01":
                    raise MatrixFormatError(f"unexpected character {ch!r}", line=i + 2, column=j + 1)
                dense[i, j] = ch == "1"
        return cls.from_dense(dense)

    def to_json(self) -> dict:
        return {
            "n_rows": self.n_rows,
            "n_cols": self.n_cols,
            "rows": ["".join("1" if v else "0" for v in row) for row in self.to_dense()],
        }

    @classmethod
    def from_json(cls, obj) -> "Matrix01":
        try:
            n_rows, n_cols, rows = int(obj["n_rows"]), int(obj["n_cols"]), obj["rows"]
        except (KeyError, TypeError, ValueError) as exc:
            raise MatrixFormatError(f"bad matrix JSON: {exc}") from None
        text = f"{n_rows} {n_cols}\n" + "\n".join(rows)
        return cls.from_text(text)


def load_matrix(text: str) -> Matrix01:
    """Parse either the plain text format or the JSON form."""
    stripped = text.lstrip()
    if stripped.startswith("{"):
        try:
            obj = json.loads(text)
        except json.JSONDecodeError as exc:
            raise MatrixFormatError(exc.msg, line=exc.lineno, column=exc.colno) from None
        return Matrix01.from_json(obj)
    return Matrix01.from_text(text)


# ---------------------------------------------------------------- BlockSpec

class GlobalIndex(NamedTuple):
    """Row/column index as (block, offset), both 1-based."""

    block: int
    offset: int


@dataclass(frozen=True)
class BlockSpec:
    """Blocks ``(n_i, k_i)``: block ``i`` is ``D(n_i, n_i - k_i)``, i.e. ``k_i`` ones per row."""

    blocks: tuple
    _offsets: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        blocks = tuple((int(n), int(k)) for n, k in self.blocks)
        if not blocks:
            raise ValueError("a BlockSpec needs at least one block")
        for n, k in blocks:
            if not n >= k >= 0 or n < 1:
                raise ValueError(f"invalid block (n={n}, k={k}); need n >= k >= 0 and n >= 1")
        object.__setattr__(self, "blocks", blocks)
        offsets = [0]
        for n, _ in blocks:
            offsets.append(offsets[-1] + n)
        object.__setattr__(self, "_offsets", tuple(offsets))

    @classmethod
    def common(cls, k: int, sizes: Iterable[int]) -> "BlockSpec":
        return cls(tuple((n, k) for n in sizes))

    @classmethod
    def parse(cls, text: str) -> "BlockSpec":
        """Parse ``"k;n1,n2,..."`` or ``"k1,k2,...;n1,n2,..."`` (whitespace ignored)."""
        s = re.sub(r"\s+", "", text)
        if s.count(";") != 1:
            raise MatrixFormatError(f"spec {text!r} must look like 'k;n1,n2' or 'k1,k2;n1,n2'")
        left, right = s.split(";")
        try:
            ks = [int(v) for v in left.split(",")]
            ns = [int(v) for v in right.split(",")]
        except ValueError:
            raise MatrixFormatError(f"spec {text!r} has a non-integer entry") from None
        if len(ks) == 1:
            ks = ks * len(ns)
        if len(ks) != len(ns):
            raise MatrixFormatError(f"spec {text!r}: {len(ks)} k-values for {len(ns)} blocks")
        try:
            return cls(tuple(zip(ns, ks)))
        except ValueError as exc:
            raise MatrixFormatError(str(exc)) from None

    def __str__(self):
        ks = self.ks
        left = str(ks[0]) if len(set(ks)) == 1 else ",".join(map(str, ks))
        return f"{left};{','.join(map(str, self.ns))}"

    def to_json(self) -> dict:
        return {"blocks": [{"n": n, "k": k} for n, k in self.blocks]}

    @classmethod
    def from_json(cls, obj) -> "BlockSpec":
        try:
            return cls(tuple((int(b["n"]), int(b["k"])) for b in obj["blocks"]))
        except (KeyError, TypeError) as exc:
            raise MatrixFormatError(f"bad BlockSpec JSON: {exc}") from None

    # -- derived quantities ---------------------------------------------------
    @property
    def m(self) -> int:
        return len(self.blocks)

    @property
    def ns(self) -> tuple:
        return tuple(n for n, _ in self.blocks)

    @property
    def ks(self) -> tuple:
        return tuple(k for _, k in self.blocks)

    @property
    def n(self) -> int:
        return self._offsets[-1]

    @property
    def d(self) -> tuple:
        """``gcd(n_i, k_i)`` per block (``n_i`` when ``k_i = 0``)."""
        return tuple(math.gcd(n, k) for n, k in self.blocks)

    @property
    def d_hat(self) -> tuple:
        """Like :attr:`d` but 1 for blocks with ``n_i == k_i``."""
        return tuple(1 if n == k else math.gcd(n, k) for n, k in self.blocks)

    @property
    def common_k(self) -> Optional[int]:
        ks = set(self.ks)
        return ks.pop() if len(ks) == 1 else None

    @property
    def offsets(self) -> tuple:
        return self._offsets

    def block_range(self, i: int) -> range:
        """0-based flat positions of block ``i`` (1-based)."""
        return range(self._offsets[i - 1], self._offsets[i])

    def flat(self, g: GlobalIndex) -> int:
        block, offset = g
        if not 1 <= block <= self.m or not 1 <= offset <= self.blocks[block - 1][0]:
            raise IndexError(f"{g} outside spec {self}")
        return self._offsets[block - 1] + offset - 1

    def global_index(self, flat: int) -> GlobalIndex:
        if not 0 <= flat < self.n:
            raise IndexError(flat)
        for i in range(self.m):
            if flat < self._offsets[i + 1]:
                return GlobalIndex(i + 1, flat - self._offsets[i] + 1)
        raise AssertionError("unreachable")

    def block_of(self, flat: int) -> int:
        return self.global_index(flat).block


# ----------------------------------------------------------------- builders

def build_D(n: int, k: int) -> Matrix01:
    """n x n circulant whose first row is ``n-k`` ones then ``k`` zeros."""
    if n < 1 or not n >= k >= 0:
        raise ValueError(f"build_D needs n >= k >= 0 and n >= 1, got n={n}, k={k}")
    return Matrix01.from_dense(_circulant_dense(n, k))


def _circulant_dense(n: int, k: int) -> np.ndarray:
    idx = np.arange(n)
    # row i is the first row shifted right i times: entry (i, j) is 1 iff (j - i) mod n < n - k
    return ((idx[None, :] - idx[:, None]) % n < n - k).astype(np.uint8)


def build_block_diagonal(spec: BlockSpec) -> Matrix01:
    dense = np.zeros((spec.n, spec.n), dtype=np.uint8)
    for i, (n_i, k_i) in enumerate(spec.blocks, start=1):
        r = spec.block_range(i)
        dense[r.start:r.stop, r.start:r.stop] = _circulant_dense(n_i, n_i - k_i)
    return Matrix01.from_dense(dense)


def complement(M: Matrix01) -> Matrix01:
    return Matrix01.from_dense(1 - M.to_dense())


def _check_perm(perm: Sequence[int], size: int, what: str) -> np.ndarray:
    arr = np.asarray(list(perm), dtype=np.int64)
    if arr.shape != (size,):
        raise ValueError(f"{what} has length {arr.shape[0] if arr.ndim else 0}, expected {size}")
    if not np.array_equal(np.sort(arr), np.arange(size)):
        raise ValueError(f"{what} is not a permutation of 0..{size - 1}")
    return arr


def permute(M: Matrix01, row_perm: Sequence[int], col_perm: Sequence[int]) -> Matrix01:
    """``result[r][c] = M[row_perm[r]][col_perm[c]]`` (0-based permutations)."""
    rp = _check_perm(row_perm, M.n_rows, "row_perm")
    cp = _check_perm(col_perm, M.n_cols, "col_perm")
    return Matrix01.from_dense(M.to_dense()[np.ix_(rp, cp)])


def inverse_perm(perm: Sequence[int]) -> list:
    inv = [0] * len(perm)
    for i, p in enumerate(perm):
        inv[p] = i
    return inv


def is_k_regular(M: Matrix01) -> Optional[int]:
    if M.n_rows != M.n_cols:
        raise ValueError("is_k_regular needs a square matrix")
    rs = M.row_sums()
    cs = M.col_sums()
    k = int(rs[0])
    if (rs == k).all() and (cs == k).all():
        return k
    return None
