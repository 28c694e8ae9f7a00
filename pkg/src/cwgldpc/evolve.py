"""Quantized protograph density evolution and base-matrix optimization.

Message densities live on a uniform LLR grid of step ``step`` covering
[-l_max, l_max], with one saturation bin beyond each end that absorbs
overflow.  Variable-node updates are plain convolutions; the two-row
constraint update is the latent-variable min-sum sequence: per set, fold
the incoming densities with the pairwise sign/min operator, convolve the
two foreign sets' results (the latent sum), apply one more pairwise
sign/min stage against the own-set leave-one-out fold, and finally scale
magnitudes by the decoder's alpha.

The pairwise sign/min operator is evaluated in closed form with cumulative
magnitude tails, O(bins) per call and exact up to rounding; a dense
O(bins^2) reference (`_minsum_pair_dense`) backs it in tests.

``sampled_de_error`` is the Monte-Carlo (population dynamics) counterpart
used to cross-validate thresholds, and ``optimize`` is a seeded genetic
search over edge patterns with an SNR-annealing schedule.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.signal import fftconvolve
from scipy.special import ndtr

from .errors import NotBracketed
from .lifting import NO_EDGE, BaseMatrix


@dataclass(frozen=True)
class LlrGrid:
    step: float = 0.05
    l_max: float = 30.0

    def __post_init__(self):
        if self.step <= 0 or self.l_max <= 0:
            raise ValueError("step and l_max must be positive")

    @property
    def half(self) -> int:
        """Regular bins per side; index +-(half+1) is the saturation bin."""
        return int(round(self.l_max / self.step))

    @property
    def size(self) -> int:
        return 2 * self.half + 3

    @property
    def center(self) -> int:
        return self.half + 1

    @cached_property
    def values(self) -> np.ndarray:
        return (np.arange(self.size) - self.center) * self.step

    def index_of(self, values) -> np.ndarray:
        """Nearest-bin indices; out-of-range values land in saturation."""
        idx = np.rint(np.asarray(values, dtype=np.float64) / self.step).astype(np.int64)
        return np.clip(idx, -self.center, self.center) + self.center

    def delta(self, value: float) -> np.ndarray:
        mass = np.zeros(self.size)
        mass[self.index_of([value])[0]] = 1.0
        return mass

    def gaussian(self, mean: float, var: float) -> np.ndarray:
        """Mass-preserving discretization of a normal distribution."""
        sd = np.sqrt(var)
        edges = (np.arange(self.size + 1) - self.center - 0.5) * self.step
        cdf = ndtr((edges - mean) / sd)
        mass = np.diff(cdf)
        mass[0] = cdf[1]          # lower saturation takes the whole tail
        mass[-1] = 1.0 - cdf[-2]  # upper saturation likewise
        return mass


def _rescale(out: np.ndarray, target: float) -> np.ndarray:
    """Pin the total mass to its exact bilinear value sum(a) sum(b)."""
    s = out.sum()
    if s > 0.0:
        out *= target / s
    return out


def _normalize(mass: np.ndarray) -> np.ndarray:
    """Renormalize a probability density to total mass exactly 1.

    Node updates emit probability densities; resetting their total each
    iteration stops rounding drift from compounding across iterations
    (each update sums several inputs' deviations, so raw drift would grow
    geometrically with the iteration count).
    """
    return mass / mass.sum()


def conv_densities(grid: LlrGrid, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Density of the sum of two independent grid LLRs (overflow saturates)."""
    full = fftconvolve(a, b)
    out = np.zeros(grid.size)
    c = grid.center
    lo, hi = c, c + grid.size  # indices of the aligned window in `full`
    out[:] = full[lo:hi]
    out[0] += full[:lo].sum()
    out[-1] += full[hi:].sum()
    np.maximum(out, 0.0, out=out)
    return _rescale(out, a.sum() * b.sum())


def _split(grid: LlrGrid, mass: np.ndarray):
    c = grid.center
    pos = mass[c + 1 :]
    neg = mass[c - 1 :: -1]
    return mass[c], pos, neg


def _tail(x: np.ndarray) -> np.ndarray:
    """Strict upper tail sums: tail[m] = sum of x[m+1:]."""
    t = np.cumsum(x[::-1])[::-1]
    return np.concatenate([t[1:], [0.0]])


def minsum_pair(grid: LlrGrid, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Density of sgn(A)sgn(B) min(|A|, |B|) for independent A, B."""
    a0, ap, an = _split(grid, a)
    b0, bp, bn = _split(grid, b)
    at, bt = a.sum(), b.sum()
    tap, tan, tbp, tbn = _tail(ap), _tail(an), _tail(bp), _tail(bn)
    cp = ap * tbp + tap * bp + ap * bp + an * tbn + tan * bn + an * bn
    cm = ap * tbn + tap * bn + ap * bn + an * tbp + tan * bp + an * bp
    out = np.empty(grid.size)
    c = grid.center
    out[c] = a0 * bt + b0 * at - a0 * b0
    out[c + 1 :] = cp
    out[:c] = cm[::-1]
    return _rescale(out, at * bt)


def _pair_index(grid: LlrGrid) -> np.ndarray:
    v = grid.values
    sign = np.where((v[:, None] < 0) != (v[None, :] < 0), -1.0, 1.0)
    mag = np.minimum(np.abs(v[:, None]), np.abs(v[None, :]))
    return grid.index_of(sign * mag)


def _minsum_pair_dense(grid: LlrGrid, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """O(bins^2) reference for minsum_pair."""
    idx = _pair_index(grid)
    return np.bincount(idx.ravel(), weights=np.outer(a, b).ravel(), minlength=grid.size)


def scale_magnitudes(grid: LlrGrid, mass: np.ndarray, alpha: float) -> np.ndarray:
    """Remap the density of L to the density of alpha*L (nearest bin)."""
    if alpha == 1.0:
        return mass.copy()
    idx = grid.index_of(alpha * grid.values)
    out = np.zeros(grid.size)
    np.add.at(out, idx, mass)
    return out


def channel_density(grid: LlrGrid, es_n0_db: float, punctured: bool = False) -> np.ndarray:
    """QPSK/AWGN LLR density of a transmitted zero bit (or a punctured one)."""
    if punctured:
        return grid.delta(0.0)
    m = 2.0 * 10.0 ** (es_n0_db / 10.0)
    return grid.gaussian(m, 2.0 * m)


class ProtoState:
    """Densities on the directed edges of one protograph."""

    def __init__(self, base: BaseMatrix, grid: LlrGrid, es_n0_db: float,
                 alpha: float = 0.75, kind: str = "cw"):
        if kind not in ("cw", "spc"):
            raise ValueError(f"unknown kind {kind!r}")
        self.base = base
        self.grid = grid
        self.alpha = alpha
        self.kind = kind
        self.iteration = 0
        rr, cc = np.nonzero(base.shifts != NO_EDGE)
        order = np.lexsort((cc, rr))
        self.edge_row = rr[order]
        self.edge_col = cc[order]
        self.cn_edges = [np.nonzero(self.edge_row == r)[0] for r in range(base.rows)]
        self.vn_edges = [np.nonzero(self.edge_col == c)[0] for c in range(base.cols)]
        punct = set(base.punctured_cols)
        self.channel = [
            channel_density(grid, es_n0_db, punctured=(c in punct)) for c in range(base.cols)
        ]
        self.v2c = [self.channel[c].copy() for c in self.edge_col]
        self.c2v = [grid.delta(0.0) for _ in self.edge_col]


def de_cn_update_cw(state: ProtoState, proto_cn: int) -> list[np.ndarray]:
    """New outgoing densities of one two-row constraint (latent sequence)."""
    grid = state.grid
    edges = state.cn_edges[proto_cn]
    d = len(edges)
    out: list[np.ndarray | None] = [None] * d
    members = [[s for s in range(d) if s % 3 == t] for t in range(3)]
    fulls = []
    loos: list[list[np.ndarray]] = []
    for t in range(3):
        dens = [state.v2c[edges[s]] for s in members[t]]
        k = len(dens)
        prefix = [grid.delta(grid.values[-1])]
        for dd in dens:
            prefix.append(minsum_pair(grid, prefix[-1], dd))
        suffix = [grid.delta(grid.values[-1])]
        for dd in reversed(dens):
            suffix.append(minsum_pair(grid, suffix[-1], dd))
        suffix.reverse()
        fulls.append(prefix[k])
        loos.append([minsum_pair(grid, prefix[j], suffix[j + 1]) for j in range(k)])
    for t in range(3):
        o1, o2 = (u for u in range(3) if u != t)
        latent = conv_densities(grid, fulls[o1], fulls[o2])
        for j, s in enumerate(members[t]):
            e = minsum_pair(grid, loos[t][j], latent)
            out[s] = _normalize(scale_magnitudes(grid, e, state.alpha))
    return out


def de_cn_update_spc(state: ProtoState, proto_cn: int) -> list[np.ndarray]:
    """New outgoing densities of one single-parity constraint."""
    grid = state.grid
    edges = state.cn_edges[proto_cn]
    dens = [state.v2c[e] for e in edges]
    k = len(dens)
    prefix = [grid.delta(grid.values[-1])]
    for dd in dens:
        prefix.append(minsum_pair(grid, prefix[-1], dd))
    suffix = [grid.delta(grid.values[-1])]
    for dd in reversed(dens):
        suffix.append(minsum_pair(grid, suffix[-1], dd))
    suffix.reverse()
    return [
        _normalize(scale_magnitudes(grid, minsum_pair(grid, prefix[j], suffix[j + 1]), state.alpha))
        for j in range(k)
    ]


def de_vn_update(state: ProtoState, proto_vn: int) -> list[np.ndarray]:
    """New outgoing densities of one variable node (channel conv others)."""
    grid = state.grid
    edges = state.vn_edges[proto_vn]
    dens = [state.c2v[e] for e in edges]
    k = len(dens)
    prefix = [state.channel[proto_vn].copy()]
    for dd in dens:
        prefix.append(conv_densities(grid, prefix[-1], dd))
    suffix = [grid.delta(0.0)]
    for dd in reversed(dens):
        suffix.append(conv_densities(grid, suffix[-1], dd))
    suffix.reverse()
    return [_normalize(conv_densities(grid, prefix[j], suffix[j + 1])) for j in range(k)]


def de_iterate(state: ProtoState) -> None:
    """One full iteration: all constraint updates, then all VN updates."""
    update = de_cn_update_cw if state.kind == "cw" else de_cn_update_spc
    for r in range(state.base.rows):
        new = update(state, r)
        for s, e in enumerate(state.cn_edges[r]):
            state.c2v[e] = new[s]
    for c in range(state.base.cols):
        new = de_vn_update(state, c)
        for s, e in enumerate(state.vn_edges[c]):
            state.v2c[e] = new[s]
    state.iteration += 1


def de_error_prob(state: ProtoState) -> float:
    """Average hard-decision error over non-punctured proto-VNs."""
    grid = state.grid
    punct = set(state.base.punctured_cols)
    errs = []
    for c in range(state.base.cols):
        if c in punct:
            continue
        app = state.channel[c]
        for e in state.vn_edges[c]:
            app = conv_densities(grid, app, state.c2v[e])
        app = _normalize(app)
        errs.append(app[: grid.center].sum() + 0.5 * app[grid.center])
    return float(np.mean(errs)) if errs else 0.0


def de_run(
    base: BaseMatrix,
    es_n0_db: float,
    iters: int,
    grid: LlrGrid | None = None,
    alpha: float = 0.75,
    kind: str = "cw",
) -> float:
    """Error probability after a fixed number of DE iterations."""
    grid = grid or LlrGrid()
    state = ProtoState(base, grid, es_n0_db, alpha=alpha, kind=kind)
    for _ in range(iters):
        de_iterate(state)
    return de_error_prob(state)


def de_threshold(
    base: BaseMatrix,
    iters: int,
    target_err: float,
    lo_db: float,
    hi_db: float,
    tol_db: float = 0.05,
    grid: LlrGrid | None = None,
    alpha: float = 0.75,
    kind: str = "cw",
) -> float:
    """Smallest Es/N0 (within tol_db) meeting target_err after iters.

    Requires lo_db to fail and hi_db to decode; raises NotBracketed
    otherwise.
    """
    if not lo_db < hi_db:
        raise ValueError("need lo_db < hi_db")
    grid = grid or LlrGrid()
    err_lo = de_run(base, lo_db, iters, grid, alpha, kind)
    err_hi = de_run(base, hi_db, iters, grid, alpha, kind)
    if err_lo <= target_err or err_hi > target_err:
        raise NotBracketed(
            f"err({lo_db} dB)={err_lo:.3g}, err({hi_db} dB)={err_hi:.3g} "
            f"do not bracket target {target_err:.3g}"
        )
    lo, hi = lo_db, hi_db
    while hi - lo > tol_db:
        mid = 0.5 * (lo + hi)
        if de_run(base, mid, iters, grid, alpha, kind) <= target_err:
            hi = mid
        else:
            lo = mid
    return hi


def sampled_de_error(
    base: BaseMatrix,
    es_n0_db: float,
    iters: int,
    samples: int = 100_000,
    seed: int = 0,
    alpha: float = 0.75,
    kind: str = "cw",
) -> float:
    """Monte-Carlo density evolution (population dynamics) error estimate.

    Independent of the quantized machinery: per-edge sample populations are
    pushed through the scalar min-sum update, with per-edge permutations
    emulating the cycle-free independence assumption.
    """
    rng = np.random.default_rng(seed)
    grid_free_state = ProtoState(base, LlrGrid(step=1.0, l_max=2.0), es_n0_db, alpha, kind)
    edge_row = grid_free_state.edge_row
    edge_col = grid_free_state.edge_col
    cn_edges = grid_free_state.cn_edges
    vn_edges = grid_free_state.vn_edges
    punct = set(base.punctured_cols)
    m = 2.0 * 10.0 ** (es_n0_db / 10.0)

    def channel_draw(c):
        if c in punct:
            return np.zeros(samples)
        return m + np.sqrt(2.0 * m) * rng.standard_normal(samples)

    v2c = [channel_draw(c) for c in edge_col]
    c2v = [np.zeros(samples) for _ in edge_col]

    def signed_min(arrs):
        sign = np.ones(samples)
        mag = np.full(samples, np.inf)
        for a in arrs:
            sign *= np.where(a < 0, -1.0, 1.0)
            np.minimum(mag, np.abs(a), out=mag)
        return sign, mag

    for _ in range(iters):
        for r in range(base.rows):
            edges = cn_edges[r]
            d = len(edges)
            ins = [rng.permutation(v2c[e]) for e in edges]
            if kind == "spc":
                for s, e in enumerate(edges):
                    others = [ins[u] for u in range(d) if u != s]
                    osg, omg = signed_min(others)
                    c2v[e] = alpha * osg * omg
                continue
            members = [[s for s in range(d) if s % 3 == t] for t in range(3)]
            fulls = [signed_min([ins[s] for s in members[t]]) for t in range(3)]
            for t in range(3):
                o1, o2 = (u for u in range(3) if u != t)
                latent = fulls[o1][0] * fulls[o1][1] + fulls[o2][0] * fulls[o2][1]
                for s in members[t]:
                    others = [ins[u] for u in members[t] if u != s]
                    if others:
                        osg, omg = signed_min(others)
                        loo = osg * omg
                        sign = np.where(loo < 0, -1.0, 1.0) * np.where(latent < 0, -1.0, 1.0)
                        e_val = sign * np.minimum(np.abs(loo), np.abs(latent))
                    else:
                        e_val = latent
                    c2v[edges[s]] = alpha * e_val
        for c in range(base.cols):
            edges = vn_edges[c]
            ins = [rng.permutation(c2v[e]) for e in edges]
            total = channel_draw(c) + np.sum(ins, axis=0)
            for s, e in enumerate(edges):
                v2c[e] = total - ins[s]
    errs = []
    for c in range(base.cols):
        if c in punct:
            continue
        app = channel_draw(c)
        for e in vn_edges[c]:
            app = app + rng.permutation(c2v[e])
        errs.append(float(np.mean(app < 0) + 0.5 * np.mean(app == 0)))
    return float(np.mean(errs))


@dataclass(frozen=True)
class GaConfig:
    population: int = 32
    survivors: int = 8
    mutation_rate: float = 0.02
    generations: int = 20


@dataclass(frozen=True)
class SnrSchedule:
    start_db: float
    step_db: float = 0.05
    target_err: float = 1e-4


def _pattern_hash(pattern: np.ndarray) -> str:
    return hashlib.sha1(np.packbits(pattern).tobytes()).hexdigest()[:16]


def _mutate(pattern: np.ndarray, rate: float, rng) -> np.ndarray:
    """Flip edge presence entrywise, keeping row degree >= 3 and no empty
    column (matrix shape, hence design rate, is preserved)."""
    out = pattern.copy()
    flips = rng.random(out.shape) < rate
    out ^= flips
    for r in range(out.shape[0]):
        while out[r].sum() < 3:
            out[r, rng.integers(out.shape[1])] = True
    for c in range(out.shape[1]):
        if not out[:, c].any():
            out[rng.integers(out.shape[0]), c] = True
    return out


def optimize(
    seed_base: BaseMatrix,
    ga: GaConfig,
    schedule: SnrSchedule,
    seed: int = 0,
    de_iters: int = 30,
    grid: LlrGrid | None = None,
    alpha: float = 0.75,
    kind: str = "cw",
    log_stream=None,
) -> BaseMatrix:
    """Genetic search over edge patterns scored by quantized DE.

    Each generation scores the population at the current SNR, keeps the
    best ``survivors`` unchanged and refills with mutants of random
    survivors; the SNR drops one step whenever the generation's best meets
    the target error.  Deterministic for a fixed seed.
    """
    grid = grid or LlrGrid()
    rng = np.random.default_rng(seed)
    lift_factor = seed_base.lift

    def to_base(pattern, shift_rng=None):
        # DE sees only the edge pattern; shifts matter only for the final
        # liftable result, where new edges get seeded random shifts.
        shifts = np.where(pattern, 0, NO_EDGE).astype(np.int64)
        keep = pattern & (seed_base.shifts != NO_EDGE)
        shifts[keep] = seed_base.shifts[keep]
        new = pattern & (seed_base.shifts == NO_EDGE)
        if shift_rng is not None and new.any():
            shifts[new] = shift_rng.integers(0, lift_factor, int(new.sum()))
        return BaseMatrix(shifts, lift_factor, seed_base.punctured_cols)

    score_cache: dict = {}

    def score(pattern, snr_db):
        key = (round(snr_db, 9), pattern.tobytes())
        if key not in score_cache:
            score_cache[key] = de_run(to_base(pattern), snr_db, de_iters, grid, alpha, kind)
        return score_cache[key]

    population = [seed_base.pattern.copy()]
    while len(population) < ga.population:
        population.append(_mutate(seed_base.pattern, ga.mutation_rate, rng))
    snr_db = schedule.start_db
    best_pattern = population[0]
    for gen in range(ga.generations):
        scored = sorted(
            (score(p, snr_db), i) for i, p in enumerate(population)
        )
        ranked = [population[i] for _, i in scored]
        best_err = scored[0][0]
        best_pattern = ranked[0]
        if log_stream is not None:
            log_stream.write(
                json.dumps(
                    {
                        "generation": gen,
                        "snr_db": round(snr_db, 6),
                        "best_err": best_err,
                        "best_matrix_hash": _pattern_hash(best_pattern),
                    }
                )
                + "\n"
            )
        if best_err <= schedule.target_err:
            snr_db -= schedule.step_db
        parents = ranked[: ga.survivors]
        population = list(parents)
        while len(population) < ga.population:
            parent = parents[rng.integers(len(parents))]
            population.append(_mutate(parent, ga.mutation_rate, rng))
    return to_base(best_pattern, shift_rng=rng)
