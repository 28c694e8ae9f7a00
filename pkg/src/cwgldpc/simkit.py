"""QPSK/AWGN channel model and Monte-Carlo block-error-rate estimation.

Gray-mapped QPSK carries two code bits per symbol on independent I/Q
rails, so per real dimension y = x + n with x = +/-sqrt(Es/2) and noise
variance N0/2.  The matched LLR is (4 sqrt(Es/2) / N0) y, which for the
transmitted bit is Gaussian with mean m = 2 Es/N0 and variance 2m.

Blocks default to the all-zero codeword (the decoders are sign-symmetric);
every 1000th block runs a random message through the real encoder as a
consistency tripwire.  Per-block RNG streams are derived from
(seed, point index, block index), so results are independent of worker
count and bit-identical across runs.
"""

from __future__ import annotations

import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .decoder import DecoderConfig, decode
from .gf2 import make_encoder
from .lifting import LiftedCode

SPOT_CHECK_PERIOD = 1000


@dataclass(frozen=True)
class ChannelSpec:
    es_n0_db: float
    modulation: str = "qpsk"

    def __post_init__(self):
        if self.modulation != "qpsk":
            raise ValueError("only qpsk is modeled")

    @property
    def llr_mean(self) -> float:
        """Mean of the LLR of a transmitted bit (variance is twice this)."""
        return 2.0 * 10.0 ** (self.es_n0_db / 10.0)


@dataclass(frozen=True)
class StopRule:
    min_block_errors: int = 100
    max_blocks: int = 1_000_000


@dataclass
class SimPoint:
    es_n0_db: float
    blocks: int
    block_errors: int
    bit_errors: int
    avg_iterations: float

    @property
    def bler(self) -> float:
        return self.block_errors / self.blocks if self.blocks else 0.0


@dataclass
class SimReport:
    points: list[SimPoint]
    seed: int
    config: dict = field(default_factory=dict)

    def to_csv(self, n_bits: int) -> str:
        lines = ["es_n0_db,blocks,block_errors,bit_errors,bler,ber,avg_iters"]
        for p in self.points:
            ber = p.bit_errors / (p.blocks * n_bits) if p.blocks else 0.0
            lines.append(
                f"{p.es_n0_db:.6g},{p.blocks},{p.block_errors},{p.bit_errors},"
                f"{p.bler:.8g},{ber:.8g},{p.avg_iterations:.6g}"
            )
        return "\n".join(lines) + "\n"


def transmit(code: LiftedCode, spec: ChannelSpec, rng, message=None, encoder=None):
    """Map a block onto the channel; returns (codeword bits, channel LLRs).

    message=None transmits the all-zero codeword.  Punctured positions get
    LLR exactly 0 and consume no channel use.
    """
    if message is None:
        word = np.zeros(code.n, dtype=np.uint8)
    else:
        if encoder is None:
            encoder = make_encoder(code.h)
        word = encoder.encode(np.asarray(message, dtype=np.uint8))
    m = spec.llr_mean
    noise = rng.standard_normal(code.n)
    llrs = (1.0 - 2.0 * word.astype(np.float64)) * m + np.sqrt(2.0 * m) * noise
    if len(code.punctured):
        llrs[code.punctured] = 0.0
    return word, llrs


def _block_rng(seed: int, point_idx: int, block_idx: int):
    return np.random.default_rng((seed, point_idx, block_idx))


def _simulate_blocks(code, cfg, spec, seed, point_idx, first, count, encoder):
    """Outcome counts for blocks [first, first+count): deterministic in
    (seed, point_idx, block index) only."""
    block_errors = 0
    bit_errors = 0
    iter_sum = 0
    for b in range(first, first + count):
        rng = _block_rng(seed, point_idx, b)
        spot = (b + 1) % SPOT_CHECK_PERIOD == 0
        if spot:
            message = rng.integers(0, 2, encoder.k).astype(np.uint8)
            word, llrs = transmit(code, spec, rng, message, encoder)
        else:
            message = None
            word, llrs = transmit(code, spec, rng)
        res = decode(code, llrs, cfg)
        iter_sum += res.iterations_used
        if spot:
            wrong = bool((res.hard_bits[encoder.info_positions] != message).any())
        else:
            wrong = bool(res.hard_bits.any())
        if wrong:
            block_errors += 1
        bit_errors += int((res.hard_bits != word).sum())
    return block_errors, bit_errors, iter_sum


_WORKER = {}


def _worker_init(code, cfg):
    _WORKER["code"] = code
    _WORKER["cfg"] = cfg
    _WORKER["encoder"] = make_encoder(code.h)


def _worker_run(args):
    spec_db, seed, point_idx, first, count = args
    return _simulate_blocks(
        _WORKER["code"],
        _WORKER["cfg"],
        ChannelSpec(spec_db),
        seed,
        point_idx,
        first,
        count,
        _WORKER["encoder"],
    )


def run_bler(
    code: LiftedCode,
    cfg: DecoderConfig,
    snr_points_db,
    stop: StopRule,
    seed: int,
    workers: int = 1,
    batch_size: int = 512,
) -> SimReport:
    """Estimate BLER/BER per SNR point until the stopping rule fires.

    Blocks are processed in fixed batches; a batch is split across workers
    but stopping decisions only happen on batch boundaries, so the report
    is identical for any worker count.  bit_errors counts code-bit
    mismatches over all n positions.
    """
    snr_points_db = [float(x) for x in snr_points_db]
    points = []
    pool = None
    encoder = None
    try:
        if workers > 1:
            pool = ProcessPoolExecutor(
                max_workers=workers, initializer=_worker_init, initargs=(code, cfg)
            )
        else:
            encoder = make_encoder(code.h)
        for p_idx, snr_db in enumerate(snr_points_db):
            spec = ChannelSpec(snr_db)
            blocks = block_errors = bit_errors = iter_sum = 0
            while blocks < stop.max_blocks and block_errors < stop.min_block_errors:
                count = min(batch_size, stop.max_blocks - blocks)
                if pool is not None:
                    chunk = (count + workers - 1) // workers
                    tasks = [
                        (snr_db, seed, p_idx, blocks + off, min(chunk, count - off))
                        for off in range(0, count, chunk)
                    ]
                    results = list(pool.map(_worker_run, tasks))
                else:
                    results = [
                        _simulate_blocks(code, cfg, spec, seed, p_idx, blocks, count, encoder)
                    ]
                for be, bib, its in results:
                    block_errors += be
                    bit_errors += bib
                    iter_sum += its
                blocks += count
            points.append(
                SimPoint(
                    es_n0_db=snr_db,
                    blocks=blocks,
                    block_errors=block_errors,
                    bit_errors=bit_errors,
                    avg_iterations=iter_sum / blocks if blocks else 0.0,
                )
            )
    finally:
        if pool is not None:
            pool.shutdown()
    return SimReport(points=points, seed=seed)


def sweep_points(start_db: float, stop_db: float, step_db: float) -> list[float]:
    """Inclusive SNR sweep [start, stop] with the given step."""
    if step_db <= 0:
        raise ValueError("step_db must be positive")
    n = int(round((stop_db - start_db) / step_db)) + 1
    return [round(start_db + i * step_db, 10) for i in range(n) if start_db + i * step_db <= stop_db + 1e-9]


def write_report(report: SimReport, out_base: str, n_bits: int) -> None:
    """Write <out_base>.csv and a JSON echo of the configuration."""
    with open(out_base + ".csv", "w") as f:
        f.write(report.to_csv(n_bits))
    echo = {
        "seed": report.seed,
        "config": report.config,
        "points": [
            {
                "es_n0_db": p.es_n0_db,
                "blocks": p.blocks,
                "block_errors": p.block_errors,
                "bit_errors": p.bit_errors,
                "avg_iterations": p.avg_iterations,
            }
            for p in report.points
        ],
    }
    with open(out_base + ".json", "w") as f:
        json.dump(echo, f, indent=2, sort_keys=True)
        f.write("\n")
