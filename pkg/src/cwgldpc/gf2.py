"""Dense GF(2) linear algebra on bit-packed matrices.

Rows are stored as little-endian uint64 words (bit ``c`` of a row lives in
word ``c // 64``, bit position ``c % 64``), so row XOR and popcount run at
machine-word granularity.  This keeps Gaussian elimination workable at the
scale of expanded parity-check matrices (thousands of rows/columns).

Also hosts the systematic encoder derived from a parity-check matrix and
reader/writer for the plain-text alist sparse-matrix format.
"""

from __future__ import annotations

import numpy as np

from .errors import DegenerateCode, DimensionMismatch

_WORD = 64


def _n_words(cols: int) -> int:
    return (cols + _WORD - 1) // _WORD


def _pack_bits(arr: np.ndarray) -> np.ndarray:
    """Pack a (rows, cols) 0/1 array into (rows, words) uint64, little-endian."""
    rows, cols = arr.shape
    pad = _n_words(cols) * _WORD - cols
    if pad:
        arr = np.hstack([arr, np.zeros((rows, pad), dtype=arr.dtype)])
    packed = np.packbits(arr.astype(np.uint8), axis=1, bitorder="little")
    return packed.view(np.uint64).copy()


class BinMatrix:
    """Binary matrix over GF(2) with bit-packed row storage."""

    __slots__ = ("rows", "cols", "words")

    def __init__(self, rows: int, cols: int, words: np.ndarray | None = None):
        self.rows = int(rows)
        self.cols = int(cols)
        if words is None:
            words = np.zeros((self.rows, _n_words(self.cols)), dtype=np.uint64)
        self.words = words

    @classmethod
    def from_dense(cls, arr) -> "BinMatrix":
        arr = np.asarray(arr)
        if arr.ndim != 2:
            raise DimensionMismatch(f"expected 2-D array, got shape {arr.shape}")
        if not np.isin(arr, (0, 1)).all():
            raise ValueError("entries must be 0 or 1")
        return cls(arr.shape[0], arr.shape[1], _pack_bits(arr))

    @classmethod
    def identity(cls, n: int) -> "BinMatrix":
        m = cls(n, n)
        for i in range(n):
            m.set(i, i, 1)
        return m

    def to_dense(self) -> np.ndarray:
        bits = np.unpackbits(self.words.view(np.uint8), axis=1, bitorder="little")
        return bits[:, : self.cols].astype(np.uint8)

    def copy(self) -> "BinMatrix":
        return BinMatrix(self.rows, self.cols, self.words.copy())

    def get(self, r: int, c: int) -> int:
        return int((self.words[r, c // _WORD] >> np.uint64(c % _WORD)) & np.uint64(1))

    def set(self, r: int, c: int, value: int) -> None:
        mask = np.uint64(1) << np.uint64(c % _WORD)
        if value:
            self.words[r, c // _WORD] |= mask
        else:
            self.words[r, c // _WORD] &= ~mask

    def column_bits(self, c: int) -> np.ndarray:
        """All rows' bits in column c as a uint64 vector of 0/1."""
        return (self.words[:, c // _WORD] >> np.uint64(c % _WORD)) & np.uint64(1)

    def swap_cols(self, a: int, b: int) -> None:
        if a == b:
            return
        ba = self.column_bits(a)
        bb = self.column_bits(b)
        diff = ba ^ bb
        wa, sa = a // _WORD, np.uint64(a % _WORD)
        wb, sb = b // _WORD, np.uint64(b % _WORD)
        self.words[:, wa] ^= diff << sa
        self.words[:, wb] ^= diff << sb

    def col_weights(self) -> np.ndarray:
        dense = self.to_dense()
        return dense.sum(axis=0)

    def row_weights(self) -> np.ndarray:
        counts = np.bitwise_count(self.words)
        return counts.sum(axis=1).astype(np.int64)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, BinMatrix)
            and self.rows == other.rows
            and self.cols == other.cols
            and np.array_equal(self.words, other.words)
        )

    def __repr__(self) -> str:
        return f"BinMatrix({self.rows}x{self.cols})"


def _eliminate(work: BinMatrix, jordan: bool) -> tuple[list[int], np.ndarray]:
    """Row-reduce in place.  Returns (pivot columns, column permutation).

    With ``jordan=True`` the result is [I | P] up to the column permutation
    (pivot columns are swapped to the front); otherwise plain row echelon
    with no column swaps.
    """
    perm = np.arange(work.cols)
    pivots: list[int] = []
    pr = 0
    for pos in range(work.cols):
        if pr >= work.rows:
            break
        # Find a pivot at column >= pos (only == pos unless jordan swaps).
        col = pos
        found = -1
        while col < work.cols:
            bits = work.column_bits(col)
            nz = np.nonzero(bits[pr:])[0]
            if nz.size:
                found = pr + int(nz[0])
                break
            if not jordan:
                break
            col += 1
        if found < 0:
            if jordan:
                break
            continue
        if jordan and col != pos:
            work.swap_cols(pos, col)
            perm[[pos, col]] = perm[[col, pos]]
            col = pos
        if found != pr:
            work.words[[pr, found]] = work.words[[found, pr]]
        bits = work.column_bits(col).astype(bool)
        bits[pr] = False
        if not jordan:
            bits[:pr] = False
        if bits.any():
            work.words[bits] ^= work.words[pr]
        pivots.append(col)
        pr += 1
    return pivots, perm


def rank(m: BinMatrix) -> int:
    """GF(2) rank; the input is not mutated."""
    pivots, _ = _eliminate(m.copy(), jordan=False)
    return len(pivots)


class SystematicEncoder:
    """Encoder for the code with parity-check matrix h.

    Built by column-permuted Gauss-Jordan reduction of h to [I | P]; the
    permutation is kept so codewords come out in original column order.
    """

    __slots__ = ("n", "k", "column_permutation", "parity_generator")

    def __init__(self, n, k, column_permutation, parity_generator):
        self.n = n
        self.k = k
        self.column_permutation = column_permutation
        self.parity_generator = parity_generator

    @property
    def info_positions(self) -> np.ndarray:
        """Original column indices carrying the message bits."""
        return self.column_permutation[self.n - self.k :]

    @property
    def parity_positions(self) -> np.ndarray:
        return self.column_permutation[: self.n - self.k]

    def encode(self, message) -> np.ndarray:
        message = np.asarray(message, dtype=np.uint8)
        if message.shape != (self.k,):
            raise DimensionMismatch(f"message length {message.shape} != k={self.k}")
        u = _pack_bits(message[None, :])[0]
        par = np.bitwise_count(self.parity_generator.words & u[None, :])
        parity = (par.sum(axis=1) & 1).astype(np.uint8)
        word = np.empty(self.n, dtype=np.uint8)
        word[self.parity_positions] = parity
        word[self.info_positions] = message
        return word


def make_encoder(h: BinMatrix) -> SystematicEncoder:
    """Derive a systematic encoder from a parity-check matrix.

    Rank-deficient matrices are accepted: k = cols - rank(h).  Raises
    DegenerateCode when k = 0.
    """
    work = h.copy()
    pivots, perm = _eliminate(work, jordan=True)
    r = len(pivots)
    k = h.cols - r
    if k < 1:
        raise DegenerateCode(f"rank {r} leaves no information bits for n={h.cols}")
    dense = work.to_dense()[:r]
    parity_gen = BinMatrix.from_dense(dense[:, r:])
    return SystematicEncoder(h.cols, k, perm, parity_gen)


def syndrome(h: BinMatrix, word) -> np.ndarray:
    """h . word^T over GF(2); all-zero iff word is a codeword."""
    word = np.asarray(word, dtype=np.uint8)
    if word.shape != (h.cols,):
        raise DimensionMismatch(f"word length {word.shape} != cols={h.cols}")
    packed = _pack_bits(word[None, :])[0]
    par = np.bitwise_count(h.words & packed[None, :])
    return (par.sum(axis=1) & 1).astype(np.uint8)


def write_alist(h: BinMatrix, path) -> None:
    """Write in the standard alist text format (1-based, zero-padded)."""
    dense = h.to_dense()
    m, n = dense.shape
    col_lists = [np.nonzero(dense[:, j])[0] + 1 for j in range(n)]
    row_lists = [np.nonzero(dense[i, :])[0] + 1 for i in range(m)]
    max_col = max((len(c) for c in col_lists), default=0)
    max_row = max((len(r) for r in row_lists), default=0)
    lines = [
        f"{n} {m}",
        f"{max_col} {max_row}",
        " ".join(str(len(c)) for c in col_lists),
        " ".join(str(len(r)) for r in row_lists),
    ]
    for c in col_lists:
        padded = list(c) + [0] * (max_col - len(c))
        lines.append(" ".join(map(str, padded)))
    for r in row_lists:
        padded = list(r) + [0] * (max_row - len(r))
        lines.append(" ".join(map(str, padded)))
    with open(path, "w") as f:
        f.write("\n".join(lines) + "\n")


def read_alist(path) -> BinMatrix:
    """Read an alist file written by write_alist (or any standard one)."""
    with open(path) as f:
        tokens = f.read().split()
    it = iter(tokens)
    n, m = int(next(it)), int(next(it))
    max_col, max_row = int(next(it)), int(next(it))
    col_deg = [int(next(it)) for _ in range(n)]
    [int(next(it)) for _ in range(m)]  # row degrees, re-derived below
    dense = np.zeros((m, n), dtype=np.uint8)
    for j in range(n):
        for _ in range(max_col):
            v = int(next(it))
            if v:
                dense[v - 1, j] = 1
    for j in range(n):
        if dense[:, j].sum() != col_deg[j]:
            raise ValueError(f"alist column {j} degree mismatch")
    # The row-index block is redundant; trust the column block.
    return BinMatrix.from_dense(dense)
