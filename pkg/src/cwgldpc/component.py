"""One two-row component check: structure, update rules, brute-force oracles.

The component code of length n has a 2 x n parity-check matrix whose columns
are the three nonzero height-2 patterns.  Positions are partitioned by
pattern into the sets X (column (0,1)^T), Y ((1,0)^T) and Z ((1,1)^T); every
codeword has equal parity v over each of the three sets.  The canonical
construction cycles the patterns b1 b2 b3 b1 ... so the set sizes stay as
balanced as possible, which minimizes the number of weight-2 codewords.

All LLRs follow the convention L = ln P(bit=0)/P(bit=1): positive favors 0.

Three constraint-node update rules are provided, each returning extrinsic
values E (the posterior minus the input, before any scaling):

* ``cn_update_sp``  - exact bitwise-MAP extrinsics computed through the
  four-word dual code.  Evaluated as a chain of pairwise box-plus
  operations, which is algebraically identical to the tanh-product form but
  stays accurate where 1 - |phi| underflows.
* ``cn_update_ms``  - two-competing-hypotheses approximation: per set keep
  the sign product and smallest magnitude, then combine with max terms.
* ``cn_update_ms_latent`` - the same quantity computed as a two-stage
  min-sum through the per-check latent variable; identical output.

``map_oracle`` and ``max_oracle`` enumerate the full code (n <= 20) and are
the reference implementations the closed forms are tested against.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from math import comb

import numpy as np
from scipy.special import logsumexp

from .errors import TooLarge, TooShort

LlrVec = np.ndarray

#: Stand-in magnitude for an empty-set sign/min aggregate.  Only ever used
#: where an exact limit exists, never in raw +/- arithmetic.
SAT_LLR = 1e6

_ORACLE_MAX_N = 20


@dataclass(frozen=True)
class ComponentCode:
    """Length and X/Y/Z index partition of one component check."""

    n: int
    part_x: tuple[int, ...]
    part_y: tuple[int, ...]
    part_z: tuple[int, ...]

    def __post_init__(self):
        if self.n < 3:
            raise TooShort(f"component code needs n >= 3, got {self.n}")
        allidx = sorted(self.part_x + self.part_y + self.part_z)
        if allidx != list(range(self.n)):
            raise ValueError("part_x/part_y/part_z must partition range(n)")
        if not (self.part_x and self.part_y and self.part_z):
            raise ValueError("every set must be nonempty")

    @property
    def parts(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        return (
            np.asarray(self.part_x, dtype=np.intp),
            np.asarray(self.part_y, dtype=np.intp),
            np.asarray(self.part_z, dtype=np.intp),
        )

    def pcm(self) -> np.ndarray:
        """The 2 x n parity-check matrix (column patterns by set)."""
        h = np.zeros((2, self.n), dtype=np.uint8)
        h[1, list(self.part_x)] = 1
        h[0, list(self.part_y)] = 1
        h[0, list(self.part_z)] = 1
        h[1, list(self.part_z)] = 1
        return h


def canonical(n: int) -> ComponentCode:
    """Partition induced by the periodic column pattern b1 b2 b3 b1 ..."""
    if n < 3:
        raise TooShort(f"component code needs n >= 3, got {n}")
    idx = np.arange(n)
    return ComponentCode(
        n,
        tuple(int(i) for i in idx[idx % 3 == 0]),
        tuple(int(i) for i in idx[idx % 3 == 1]),
        tuple(int(i) for i in idx[idx % 3 == 2]),
    )


def weight2_count(code: ComponentCode) -> int:
    """Number of weight-2 codewords: same-set position pairs."""
    return (
        comb(len(code.part_x), 2)
        + comb(len(code.part_y), 2)
        + comb(len(code.part_z), 2)
    )


@lru_cache(maxsize=64)
def _codeword_table(code: ComponentCode) -> np.ndarray:
    """All codewords as a (2^(n-2), n) uint8 array.

    A word is a codeword iff its parity over X, Y and Z is one common
    value v; enumerate all n-bit words and filter on that condition.
    """
    n = code.n
    if n > _ORACLE_MAX_N:
        raise TooLarge(f"oracle enumeration capped at n={_ORACLE_MAX_N}, got {n}")
    words = np.arange(1 << n, dtype=np.uint64)
    masks = []
    for part in code.parts:
        m = np.uint64(0)
        for i in part:
            m |= np.uint64(1) << np.uint64(i)
        masks.append(m)
    px = np.bitwise_count(words & masks[0]) & 1
    py = np.bitwise_count(words & masks[1]) & 1
    pz = np.bitwise_count(words & masks[2]) & 1
    keep = words[(px == py) & (py == pz)]
    bits = (keep[:, None] >> np.arange(n, dtype=np.uint64)) & np.uint64(1)
    return bits.astype(np.uint8)


def enumerate_codewords(code: ComponentCode) -> np.ndarray:
    """Copy of the full codeword table (rows are codewords)."""
    return _codeword_table(code).copy()


def _check_llrs(code: ComponentCode, llrs) -> np.ndarray:
    llrs = np.asarray(llrs, dtype=np.float64)
    if llrs.shape != (code.n,):
        raise ValueError(f"expected {code.n} LLRs, got shape {llrs.shape}")
    return llrs


def map_oracle(code: ComponentCode, llrs: LlrVec) -> LlrVec:
    """Exact bitwise-MAP posteriors by exhaustive summation.

    Returns L-hat with L-hat_i = ln(sigma_i0 / sigma_i1), stabilized via
    log-sum-exp.  Up to a common constant, ln mu(c) = -c . L.
    """
    llrs = _check_llrs(code, llrs)
    table = _codeword_table(code)
    logmu = -(table @ llrs)
    out = np.empty(code.n)
    for i in range(code.n):
        ones = table[:, i].astype(bool)
        out[i] = logsumexp(logmu[~ones]) - logsumexp(logmu[ones])
    return out


def max_oracle(code: ComponentCode, llrs: LlrVec) -> LlrVec:
    """Best-codeword-per-hypothesis posteriors by exhaustive search."""
    llrs = _check_llrs(code, llrs)
    table = _codeword_table(code)
    logmu = -(table @ llrs)
    out = np.empty(code.n)
    for i in range(code.n):
        ones = table[:, i].astype(bool)
        out[i] = logmu[~ones].max() - logmu[ones].max()
    return out


def boxplus(a, b):
    """Pairwise LLR combination 2 atanh(tanh(a/2) tanh(b/2)), exactly.

    Evaluated as sign(a)sign(b) min(|a|,|b|) plus log-domain corrections,
    which is stable for arbitrarily large magnitudes.  An operand of +inf
    acts as the identity.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    sign = np.where((a < 0) != (b < 0), -1.0, 1.0)
    mag = np.minimum(np.abs(a), np.abs(b))
    with np.errstate(over="ignore", invalid="ignore"):
        corr = np.log1p(np.exp(-np.abs(a + b))) - np.log1p(np.exp(-np.abs(a - b)))
    corr = np.where(np.isnan(corr), 0.0, corr)
    return sign * mag + corr


def _boxplus_fold(values: np.ndarray) -> float:
    acc = np.inf
    for v in values:
        acc = float(boxplus(acc, v))
    return acc


def cn_update_sp(code: ComponentCode, llrs: LlrVec) -> LlrVec:
    """Exact MAP extrinsics through the dual code (sum-product rule).

    For i in X the extrinsic is 2 atanh[phi_{X\\i} tanh(atanh phi_Y +
    atanh phi_Z)] with phi_S the product of tanh(L_j/2) over S; the other
    sets take the symmetric roles.  Computed as
    boxplus(fold(X\\i), fold(Y) + fold(Z)).
    """
    llrs = _check_llrs(code, llrs)
    parts = code.parts
    folds = [_boxplus_fold(llrs[p]) for p in parts]
    out = np.empty(code.n)
    for s, own in enumerate(parts):
        o1, o2 = (t for t in range(3) if t != s)
        latent = folds[o1] + folds[o2]
        for i in own:
            loo = _boxplus_fold(llrs[own[own != i]])
            out[i] = float(boxplus(loo, latent))
    return out


def _signed_min(values: np.ndarray) -> float:
    """Sign product times smallest magnitude; +SAT_LLR for an empty set."""
    if values.size == 0:
        return SAT_LLR
    sign = -1.0 if int(np.count_nonzero(values < 0)) % 2 else 1.0
    return sign * float(np.abs(values).min())


def _ms_pieces(code: ComponentCode, llrs: np.ndarray):
    """Yield (i, own_loo_or_None, latent_sum) for every position."""
    parts = code.parts
    full = [_signed_min(llrs[p]) for p in parts]
    for s, own in enumerate(parts):
        o1, o2 = (t for t in range(3) if t != s)
        latent = full[o1] + full[o2]
        for i in own:
            rest = llrs[own[own != i]]
            loo = None if rest.size == 0 else _signed_min(rest)
            yield int(i), loo, latent


def cn_update_ms(code: ComponentCode, llrs: LlrVec) -> LlrVec:
    """Two-hypothesis (min-sum style) extrinsics.

    E_i = max(Lx + S, 0) - max(S, Lx) with Lx the signed min over the own
    set minus i and S the sum of the other two sets' signed mins.  When the
    own set has no other member the exact limit E_i = S applies.
    """
    llrs = _check_llrs(code, llrs)
    out = np.empty(code.n)
    for i, loo, latent in _ms_pieces(code, llrs):
        if loo is None:
            out[i] = latent
        else:
            out[i] = max(loo + latent, 0.0) - max(latent, loo)
    return out


def cn_update_ms_latent(code: ComponentCode, llrs: LlrVec) -> LlrVec:
    """Min-sum extrinsics computed through the latent-variable graph.

    The other two sets' signed mins are summed on the latent variable, then
    combined with the own set by one more sign/min stage:
    E_i = sgn(Lx) sgn(S) min(|Lx|, |S|).  Identical to cn_update_ms.
    """
    llrs = _check_llrs(code, llrs)
    out = np.empty(code.n)
    for i, loo, latent in _ms_pieces(code, llrs):
        if loo is None:
            loo = SAT_LLR
        sign = (-1.0 if loo < 0 else 1.0) * (-1.0 if latent < 0 else 1.0)
        out[i] = sign * min(abs(loo), abs(latent))
    return out
