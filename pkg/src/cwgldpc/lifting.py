"""Code construction: protograph base matrices and quasi-cyclic lifting.

A base matrix holds one circulant shift (or NO_EDGE) per protograph edge
plus the lifting factor and the set of punctured proto-columns.  Lifting
replaces each edge by a shifted identity block, yielding the constraint
adjacency Gamma; the binary parity-check matrix H is obtained by replacing
every 1 of Gamma with the matching column of the constraint's component
code.  Per constraint node, column types follow the canonical periodic
pattern over its incident columns in increasing column order.

``kind="spc"`` lifts the same protograph into a plain LDPC code (each
constraint a single parity check), used as the conventional baseline.

The latent-variable expansion rewrites each two-row component check as
three single parity checks over X, Y, Z plus one appended latent column.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from . import component as comp
from .errors import BaseMatrixFormatError, DegenerateRow
from .gf2 import BinMatrix, rank

NO_EDGE = -1


@dataclass
class BaseMatrix:
    """Protograph with circulant shifts; -1 marks an absent edge."""

    shifts: np.ndarray
    lift: int
    punctured_cols: tuple[int, ...] = ()

    def __post_init__(self):
        self.shifts = np.asarray(self.shifts, dtype=np.int64)
        if self.shifts.ndim != 2:
            raise ValueError("shifts must be a 2-D array")
        if self.lift < 1:
            raise ValueError("lift must be >= 1")
        bad = (self.shifts != NO_EDGE) & ((self.shifts < 0) | (self.shifts >= self.lift))
        if bad.any():
            raise ValueError("shifts must lie in [0, lift) or be NO_EDGE")
        self.punctured_cols = tuple(sorted(set(int(c) for c in self.punctured_cols)))
        if any(c < 0 or c >= self.cols for c in self.punctured_cols):
            raise ValueError("punctured column index out of range")

    @property
    def rows(self) -> int:
        return self.shifts.shape[0]

    @property
    def cols(self) -> int:
        return self.shifts.shape[1]

    @property
    def pattern(self) -> np.ndarray:
        return self.shifts != NO_EDGE

    def row_degrees(self) -> np.ndarray:
        return self.pattern.sum(axis=1)

    def save(self, path) -> None:
        lines = [f"{self.rows} {self.cols} {self.lift}"]
        for r in range(self.rows):
            lines.append(" ".join(str(int(v)) for v in self.shifts[r]))
        lines.append("punctured: " + " ".join(str(c) for c in self.punctured_cols))
        with open(path, "w") as f:
            f.write("\n".join(lines) + "\n")

    @classmethod
    def load(cls, path) -> "BaseMatrix":
        with open(path) as f:
            raw_lines = f.read().splitlines()
        lines = [(i + 1, ln) for i, ln in enumerate(raw_lines) if ln.strip()]
        if not lines:
            raise BaseMatrixFormatError("empty base-matrix file", line=1)
        lineno, header = lines[0]
        parts = header.split()
        if len(parts) != 3:
            raise BaseMatrixFormatError("header must be 'rows cols lift'", line=lineno)
        try:
            rows, cols, lift = (int(p) for p in parts)
        except ValueError:
            raise BaseMatrixFormatError("non-integer header field", line=lineno) from None
        if len(lines) < 1 + rows:
            raise BaseMatrixFormatError(
                f"expected {rows} shift rows, found {len(lines) - 1}", line=lines[-1][0]
            )
        shifts = np.empty((rows, cols), dtype=np.int64)
        for r in range(rows):
            lineno, ln = lines[1 + r]
            toks = ln.split()
            if len(toks) != cols:
                raise BaseMatrixFormatError(
                    f"expected {cols} entries, found {len(toks)}", line=lineno
                )
            for c, tok in enumerate(toks):
                try:
                    shifts[r, c] = int(tok)
                except ValueError:
                    raise BaseMatrixFormatError(
                        f"non-integer shift {tok!r}", line=lineno, column=c + 1
                    ) from None
        punctured: tuple[int, ...] = ()
        if len(lines) > 1 + rows:
            lineno, ln = lines[1 + rows]
            if not ln.startswith("punctured:"):
                raise BaseMatrixFormatError("expected 'punctured:' line", line=lineno)
            try:
                punctured = tuple(int(t) for t in ln.split()[1:])
            except ValueError:
                raise BaseMatrixFormatError("non-integer punctured index", line=lineno) from None
        try:
            return cls(shifts, lift, punctured)
        except ValueError as exc:
            raise BaseMatrixFormatError(str(exc), line=1) from None


def assign_shifts(pattern, lift: int, seed: int, max_tries: int = 100) -> BaseMatrix:
    """Choose circulant shifts for a 0/1 protograph pattern.

    Shifts are drawn from a seeded generator; a candidate that closes a
    length-4 cycle in the lifted graph with already-placed edges is
    redrawn, up to max_tries, after which the last draw is kept (some
    patterns cannot avoid all 4-cycles).
    """
    pattern = np.asarray(pattern, dtype=bool)
    rng = np.random.default_rng(seed)
    shifts = np.full(pattern.shape, NO_EDGE, dtype=np.int64)
    rows, cols = pattern.shape
    for r in range(rows):
        for c in range(cols):
            if not pattern[r, c]:
                continue
            for _ in range(max_tries):
                s = int(rng.integers(lift))
                if not _closes_4cycle(shifts, lift, r, c, s):
                    break
            shifts[r, c] = s
    return BaseMatrix(shifts, lift)


def _closes_4cycle(shifts, lift, r, c, s) -> bool:
    rows, cols = shifts.shape
    for r2 in range(rows):
        if r2 == r or shifts[r2, c] == NO_EDGE:
            continue
        for c2 in range(cols):
            if c2 == c or shifts[r, c2] == NO_EDGE or shifts[r2, c2] == NO_EDGE:
                continue
            if (s - shifts[r, c2] + shifts[r2, c2] - shifts[r2, c]) % lift == 0:
                return True
    return False


@dataclass
class LiftedCode:
    """Expanded code: adjacency, binary PCM and decoder-facing edge lists."""

    base: BaseMatrix | None
    kind: str  # "cw" or "spc"
    n: int
    m_cn: int
    cn_ptr: np.ndarray  # int64[m_cn + 1]
    edge_col: np.ndarray  # int32[num_edges], sorted by (cn, col)
    h: BinMatrix
    punctured: np.ndarray  # sorted int32 column indices
    layer_size: int  # constraint nodes per layer (one lifted proto-row)
    _cache: dict = field(default_factory=dict, repr=False)

    @property
    def n_tx(self) -> int:
        return self.n - len(self.punctured)

    @cached_property
    def k(self) -> int:
        return self.n - rank(self.h)

    @property
    def num_layers(self) -> int:
        return self.m_cn // self.layer_size

    def cn_degree(self, j: int) -> int:
        return int(self.cn_ptr[j + 1] - self.cn_ptr[j])

    @property
    def cn_degrees(self) -> np.ndarray:
        return np.diff(self.cn_ptr).astype(np.int64)

    @property
    def cn_codes(self) -> list[comp.ComponentCode] | None:
        """Per-constraint component code (shared per degree); None for spc."""
        if self.kind != "cw":
            return None
        by_deg = {int(d): comp.canonical(int(d)) for d in np.unique(self.cn_degrees)}
        return [by_deg[int(d)] for d in self.cn_degrees]

    @cached_property
    def gamma(self) -> BinMatrix:
        dense = np.zeros((self.m_cn, self.n), dtype=np.uint8)
        cn_of_edge = np.repeat(np.arange(self.m_cn), np.diff(self.cn_ptr))
        dense[cn_of_edge, self.edge_col] = 1
        return BinMatrix.from_dense(dense)


def _lifted_edges(base: BaseMatrix):
    """Edge arrays (cn_ptr, edge_col) for the lifted adjacency."""
    L = base.lift
    m_cn = base.rows * L
    cns = []
    cols = []
    for r in range(base.rows):
        for c in range(base.cols):
            s = base.shifts[r, c]
            if s == NO_EDGE:
                continue
            i = np.arange(L)
            cns.append(r * L + i)
            cols.append(c * L + (i + s) % L)
    cn_idx = np.concatenate(cns)
    col_idx = np.concatenate(cols)
    order = np.lexsort((col_idx, cn_idx))
    cn_idx = cn_idx[order]
    col_idx = col_idx[order].astype(np.int32)
    cn_ptr = np.zeros(m_cn + 1, dtype=np.int64)
    np.add.at(cn_ptr, cn_idx + 1, 1)
    cn_ptr = np.cumsum(cn_ptr)
    return cn_ptr, col_idx


def lift(base: BaseMatrix, kind: str = "cw") -> LiftedCode:
    """Expand a base matrix into a LiftedCode.

    kind="cw": each constraint node enforces the two-row component code of
    its degree (H has 2 rows per CN).  kind="spc": plain LDPC (one parity
    row per CN).  Raises DegenerateRow for CW rows of degree < 3.
    """
    if kind not in ("cw", "spc"):
        raise ValueError(f"unknown kind {kind!r}")
    degs = base.row_degrees()
    if kind == "cw" and (degs < 3).any():
        r = int(np.argmax(degs < 3))
        raise DegenerateRow(f"base row {r} has degree {int(degs[r])} < 3")
    if (degs < 1).any():
        r = int(np.argmax(degs < 1))
        raise DegenerateRow(f"base row {r} has no edges")
    L = base.lift
    n = base.cols * L
    m_cn = base.rows * L
    cn_ptr, edge_col = _lifted_edges(base)
    cn_of_edge = np.repeat(np.arange(m_cn), np.diff(cn_ptr))
    slot = np.arange(len(edge_col)) - cn_ptr[cn_of_edge]
    if kind == "cw":
        h_dense = np.zeros((2 * m_cn, n), dtype=np.uint8)
        t = slot % 3
        first = t != 0  # Y and Z columns set the first row
        second = t != 1  # X and Z columns set the second row
        h_dense[2 * cn_of_edge[first], edge_col[first]] = 1
        h_dense[2 * cn_of_edge[second] + 1, edge_col[second]] = 1
    else:
        h_dense = np.zeros((m_cn, n), dtype=np.uint8)
        h_dense[cn_of_edge, edge_col] = 1
    punct = np.concatenate(
        [np.arange(c * L, (c + 1) * L) for c in base.punctured_cols]
    ).astype(np.int32) if base.punctured_cols else np.empty(0, dtype=np.int32)
    return LiftedCode(
        base=base,
        kind=kind,
        n=n,
        m_cn=m_cn,
        cn_ptr=cn_ptr,
        edge_col=edge_col,
        h=BinMatrix.from_dense(h_dense),
        punctured=punct,
        layer_size=L,
    )


def from_pcm(h: BinMatrix, punctured=(), layer_size: int = 1) -> LiftedCode:
    """Wrap an arbitrary binary PCM (e.g. loaded from alist) as an SPC code."""
    dense = h.to_dense()
    rows, cols = np.nonzero(dense)
    order = np.lexsort((cols, rows))
    edge_col = cols[order].astype(np.int32)
    cn_ptr = np.zeros(h.rows + 1, dtype=np.int64)
    np.add.at(cn_ptr, rows + 1, 1)
    cn_ptr = np.cumsum(cn_ptr)
    if (np.diff(cn_ptr) < 1).any():
        raise DegenerateRow("PCM has an empty row")
    return LiftedCode(
        base=None,
        kind="spc",
        n=h.cols,
        m_cn=h.rows,
        cn_ptr=cn_ptr,
        edge_col=edge_col,
        h=h,
        punctured=np.asarray(sorted(punctured), dtype=np.int32),
        layer_size=layer_size,
    )


def expand_latent_pcm(code: LiftedCode) -> BinMatrix:
    """Rewrite each component check as three SPC rows plus a latent column.

    Returns a (3M) x (N + M) matrix: constraint j contributes rows 3j..3j+2
    covering its X, Y and Z columns respectively, each also including the
    appended latent column N + j.  Latent columns are never transmitted.
    """
    if code.kind != "cw":
        raise ValueError("latent expansion applies to cw codes")
    m, n = code.m_cn, code.n
    dense = np.zeros((3 * m, n + m), dtype=np.uint8)
    cn_of_edge = np.repeat(np.arange(m), np.diff(code.cn_ptr))
    slot = np.arange(len(code.edge_col)) - code.cn_ptr[cn_of_edge]
    dense[3 * cn_of_edge + slot % 3, code.edge_col] = 1
    dense[np.repeat(3 * np.arange(m), 3) + np.tile([0, 1, 2], m), np.repeat(n + np.arange(m), 3)] = 1
    return BinMatrix.from_dense(dense)


def latent_spc_code(code: LiftedCode) -> LiftedCode:
    """The latent expansion as a decodable SPC LiftedCode.

    Constraint nodes are ordered (proto row, set, lift offset) so one layer
    is one lifted SPC proto-row; the latent columns are marked punctured.
    """
    key = "latent_spc"
    if key in code._cache:
        return code._cache[key]
    if code.kind != "cw":
        raise ValueError("latent expansion applies to cw codes")
    L = code.layer_size
    m, n = code.m_cn, code.n
    cn_of_edge = np.repeat(np.arange(m), np.diff(code.cn_ptr))
    slot = np.arange(len(code.edge_col)) - code.cn_ptr[cn_of_edge]
    t = slot % 3
    r = cn_of_edge // L
    i = cn_of_edge % L
    new_cn = (3 * r + t) * L + i
    cols = code.edge_col.astype(np.int64)
    # One latent edge per (original CN, set).
    lat_cn = (3 * (np.arange(m) // L)[None, :] + np.array([[0], [1], [2]])) * L + (np.arange(m) % L)[None, :]
    lat_col = np.broadcast_to(n + np.arange(m), (3, m))
    all_cn = np.concatenate([new_cn, lat_cn.ravel()])
    all_col = np.concatenate([cols, lat_col.ravel()])
    order = np.lexsort((all_col, all_cn))
    all_cn = all_cn[order]
    all_col = all_col[order].astype(np.int32)
    cn_ptr = np.zeros(3 * m + 1, dtype=np.int64)
    np.add.at(cn_ptr, all_cn + 1, 1)
    cn_ptr = np.cumsum(cn_ptr)
    h_dense = np.zeros((3 * m, n + m), dtype=np.uint8)
    h_dense[all_cn, all_col] = 1
    punct = np.concatenate([code.punctured, n + np.arange(m, dtype=np.int32)])
    out = LiftedCode(
        base=code.base,
        kind="spc",
        n=n + m,
        m_cn=3 * m,
        cn_ptr=cn_ptr,
        edge_col=all_col,
        h=BinMatrix.from_dense(h_dense),
        punctured=punct.astype(np.int32),
        layer_size=L,
    )
    code._cache[key] = out
    return out


def analyze(code: LiftedCode) -> dict:
    """Structural report: column-weight average, weight-2 words per CN,
    constraint degree histogram."""
    avg_col_weight = float(code.h.row_weights().sum()) / code.n
    degs = code.cn_degrees
    hist = {int(d): int((degs == d).sum()) for d in np.unique(degs)}
    if code.kind == "cw":
        w2 = [comp.weight2_count(comp.canonical(int(d))) for d in degs]
    else:
        w2 = [0] * code.m_cn
    return {
        "avg_col_weight": avg_col_weight,
        "weight2_cw_per_cn": w2,
        "degree_histogram": hist,
    }


# 6x16 protograph with row degrees (6,6,6,5,5,5); with lift 16 this gives a
# [256, 64] rate-1/4 code with average column weight ~2.6.
_SCENARIO_C_PATTERN = np.array(
    [
        [0, 0, 1, 1, 0, 0, 1, 0, 0, 0, 0, 1, 0, 1, 1, 0],
        [1, 1, 0, 1, 1, 0, 0, 0, 1, 0, 0, 0, 1, 0, 0, 0],
        [1, 0, 0, 0, 0, 1, 0, 0, 1, 1, 0, 0, 0, 1, 0, 1],
        [0, 1, 1, 0, 0, 0, 0, 0, 0, 1, 1, 1, 0, 0, 0, 0],
        [0, 0, 0, 0, 0, 1, 0, 1, 0, 0, 1, 0, 1, 0, 1, 0],
        [0, 0, 0, 0, 1, 0, 1, 1, 0, 1, 0, 0, 0, 0, 0, 1],
    ],
    dtype=bool,
)


def make_scenario_c_like_base(seed: int = 7, lift_factor: int = 16) -> BaseMatrix:
    """A [256, 64]-class rate-1/4 base matrix (6x16, lift 16 by default)."""
    return assign_shifts(_SCENARIO_C_PATTERN, lift_factor, seed)


def make_punctured_baseline_base(seed: int = 5, shift_seed: int = 11) -> BaseMatrix:
    """A 5G-flavored rate-1/4 QC-LDPC baseline: 20x26 protograph, lift 11,
    two punctured high-degree columns, dense core with dual-diagonal
    parities, and degree-1 extension columns.  Decode with kind="spc"."""
    rng = np.random.default_rng(seed)
    rows, cols, core = 20, 26, 4
    pat = np.zeros((rows, cols), dtype=bool)
    ext = np.arange(core, rows)
    pat[:core, 0] = True
    pat[:core, 1] = True
    for r in ext:
        pat[r, rng.integers(2)] = True
        if rng.random() < 0.35:
            pat[r, 1 - rng.integers(2)] = True
    for c in range(2, 6):
        pat[:core, c] = True
        pat[rng.choice(ext, 2, replace=False), c] = True
    for i in range(core):
        pat[i, 6 + i] = True
        if i + 1 < core:
            pat[i + 1, 6 + i] = True
    pat[0, 9] = True
    for j, r in enumerate(ext):
        pat[r, 10 + j] = True
        pat[r, 6 + rng.integers(core)] = True
    base = assign_shifts(pat, 11, shift_seed)
    return BaseMatrix(base.shifts, base.lift, punctured_cols=(0, 1))


def random_base_pattern(rows: int, cols: int, col_degree: int, seed: int) -> np.ndarray:
    """Random 0/1 protograph with fixed column degree and balanced rows.

    Configuration-model sampling with rejection: retries until no column
    repeats a row and every row keeps degree >= 3.
    """
    rng = np.random.default_rng(seed)
    edges = cols * col_degree
    slots = np.repeat(np.arange(rows), edges // rows)
    if edges % rows:
        slots = np.concatenate([slots, np.arange(edges % rows)])
    for _ in range(10000):
        per_col = rng.permutation(slots).reshape(cols, col_degree)
        if any(len(set(cr)) != col_degree for cr in per_col.tolist()):
            continue
        pattern = np.zeros((rows, cols), dtype=bool)
        for c in range(cols):
            pattern[per_col[c], c] = True
        if (pattern.sum(axis=1) >= 3).all():
            return pattern
    raise ValueError("failed to sample a valid pattern; adjust parameters")
