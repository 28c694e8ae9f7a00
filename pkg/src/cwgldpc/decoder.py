"""Iterative message-passing decoder over a LiftedCode.

Variable nodes behave exactly as in conventional LDPC decoding (channel
LLR plus incoming extrinsics, excluding the target edge); the constraint
update is pluggable:

* ``sp_hr``   exact MAP extrinsics through the dual code (sum-product),
* ``ms_cw``   the two-hypothesis min-sum rule for two-row checks,
* ``nms_spc`` normalized min-sum for single-parity-check constraints.

``latent_mode`` routes ms_cw through the latent-variable form of the same
rule (identical outputs), and makes nms_spc decode the latent-expanded
matrix as a plain LDPC code with the latent columns punctured - the
degraded baseline the scheduled rules are compared against.

Extrinsics are scaled by alpha; the default is 1.0 for sp_hr and 0.75 for
the min-sum rules.  All messages are clamped to +/- llr_clamp.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import ConfigMismatch, DimensionMismatch
from .gf2 import syndrome
from .lifting import LiftedCode, latent_spc_code

ALGORITHMS = ("sp_hr", "ms_cw", "nms_spc")
SCHEDULES = ("flooding", "layered")

_RULE_OF = {
    ("nms_spc", False): kernels.RULE_NMS_SPC,
    ("nms_spc", True): kernels.RULE_NMS_SPC,
    ("ms_cw", False): kernels.RULE_MS_CW,
    ("ms_cw", True): kernels.RULE_MS_CW_LATENT,
    ("sp_hr", False): kernels.RULE_SP_HR,
    ("sp_hr", True): kernels.RULE_SP_HR,
}


@dataclass(frozen=True)
class DecoderConfig:
    algorithm: str = "ms_cw"
    schedule: str = "layered"
    max_iters: int = 10
    alpha: float | None = None  # None: 1.0 for sp_hr, 0.75 otherwise
    latent_mode: bool = False
    llr_clamp: float = 50.0

    def __post_init__(self):
        if self.algorithm not in ALGORITHMS:
            raise ValueError(f"algorithm must be one of {ALGORITHMS}")
        if self.schedule not in SCHEDULES:
            raise ValueError(f"schedule must be one of {SCHEDULES}")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if self.alpha is not None and not 0.0 < self.alpha <= 1.0:
            raise ValueError("alpha must lie in (0, 1]")
        if self.llr_clamp <= 0:
            raise ValueError("llr_clamp must be positive")

    @property
    def resolved_alpha(self) -> float:
        if self.alpha is not None:
            return self.alpha
        return 1.0 if self.algorithm == "sp_hr" else 0.75


@dataclass
class DecodeResult:
    hard_bits: np.ndarray
    app_llrs: np.ndarray
    iterations_used: int
    converged: bool
    error_trace: list[int] | None = None


def _graph_arrays(code: LiftedCode):
    """Kernel-facing arrays (cached): h CSR plus a validated layer size."""
    key = "graph_arrays"
    if key in code._cache:
        return code._cache[key]
    dense = code.h.to_dense()
    rows, cols = np.nonzero(dense)
    order = np.lexsort((cols, rows))
    hrow_col = cols[order].astype(np.int64)
    hrow_ptr = np.zeros(code.h.rows + 1, dtype=np.int64)
    np.add.at(hrow_ptr, rows + 1, 1)
    hrow_ptr = np.cumsum(hrow_ptr)
    layer_size = code.layer_size
    degrees = np.diff(code.cn_ptr)
    ok = True
    for l0 in range(0, code.m_cn, layer_size):
        block = degrees[l0 : l0 + layer_size]
        if not (block == block[0]).all():
            ok = False
            break
        lo, hi = code.cn_ptr[l0], code.cn_ptr[min(l0 + layer_size, code.m_cn)]
        cols_blk = code.edge_col[lo:hi]
        if len(np.unique(cols_blk)) != len(cols_blk):
            ok = False
            break
    if not ok:
        layer_size = 1  # serial layers are always safe
    arrays = (
        code.cn_ptr.astype(np.int64),
        code.edge_col.astype(np.int64),
        code.n,
        layer_size,
        hrow_ptr,
        hrow_col,
    )
    code._cache[key] = arrays
    return arrays


def _latent_truth(code: LiftedCode, truth: np.ndarray) -> np.ndarray:
    """Append the latent bits implied by a codeword (common set parity)."""
    cn_of_edge = np.repeat(np.arange(code.m_cn), np.diff(code.cn_ptr))
    slot = np.arange(len(code.edge_col)) - code.cn_ptr[cn_of_edge]
    x_edges = slot % 3 == 0
    v = np.zeros(code.m_cn, dtype=np.uint8)
    np.bitwise_xor.at(v, cn_of_edge[x_edges], truth[code.edge_col[x_edges]])
    return np.concatenate([truth.astype(np.uint8), v])


def decode(
    code: LiftedCode,
    channel_llrs,
    cfg: DecoderConfig,
    truth=None,
) -> DecodeResult:
    """Decode one block of channel LLRs.

    Punctured positions are expected to carry LLR 0.  With ``truth`` given
    (genie mode) the per-iteration bit-error trace is recorded; truth never
    influences termination.
    """
    channel = np.asarray(channel_llrs, dtype=np.float64)
    if channel.shape != (code.n,):
        raise DimensionMismatch(f"expected {code.n} LLRs, got {channel.shape}")

    if cfg.algorithm == "nms_spc" and code.kind == "cw":
        if not cfg.latent_mode:
            raise ConfigMismatch(
                "nms_spc needs single-parity constraints; enable latent_mode "
                "to decode the latent expansion"
            )
        return _decode_latent(code, channel, cfg, truth)
    if cfg.algorithm in ("ms_cw", "sp_hr") and code.kind != "cw":
        raise ConfigMismatch(f"{cfg.algorithm} requires a cw code, got kind={code.kind!r}")

    rule = _RULE_OF[(cfg.algorithm, cfg.latent_mode)]
    cn_ptr, edge_col, n, layer_size, hrow_ptr, hrow_col = _graph_arrays(code)
    schedule = kernels.SCHEDULE_FLOODING if cfg.schedule == "flooding" else kernels.SCHEDULE_LAYERED
    truth_arr = None if truth is None else np.asarray(truth, dtype=np.uint8)
    hard, app, iters, converged, trace = kernels.decode_mp(
        cn_ptr,
        edge_col,
        n,
        channel,
        rule,
        schedule,
        cfg.max_iters,
        cfg.resolved_alpha,
        cfg.llr_clamp,
        layer_size,
        hrow_ptr,
        hrow_col,
        truth_arr,
    )
    return DecodeResult(hard, app, iters, converged, trace)


def _decode_latent(code, channel, cfg, truth) -> DecodeResult:
    latent = latent_spc_code(code)
    ext_channel = np.concatenate([channel, np.zeros(code.m_cn)])
    ext_truth = None if truth is None else _latent_truth(code, np.asarray(truth, dtype=np.uint8))
    sub = DecoderConfig(
        algorithm="nms_spc",
        schedule=cfg.schedule,
        max_iters=cfg.max_iters,
        alpha=cfg.resolved_alpha,
        latent_mode=False,
        llr_clamp=cfg.llr_clamp,
    )
    res = decode(latent, ext_channel, sub, truth=ext_truth)
    hard = res.hard_bits[: code.n]
    # error_trace, when requested, counts code and latent bits together.
    return DecodeResult(
        hard_bits=hard,
        app_llrs=res.app_llrs[: code.n],
        iterations_used=res.iterations_used,
        converged=syndrome_ok(code, hard),
        error_trace=res.error_trace,
    )


def decode_latent_baseline(code: LiftedCode, channel_llrs, cfg: DecoderConfig, truth=None) -> DecodeResult:
    """Decode via the latent expansion as a plain LDPC code.

    Runs normalized min-sum over the three-SPC-rows-per-check matrix with
    the latent columns initialized to LLR 0 and no recovery scheduling;
    the result is projected back onto the code bits.
    """
    sub = DecoderConfig(
        algorithm="nms_spc",
        schedule=cfg.schedule,
        max_iters=cfg.max_iters,
        alpha=cfg.resolved_alpha,
        latent_mode=True,
        llr_clamp=cfg.llr_clamp,
    )
    return decode(code, channel_llrs, sub, truth=truth)


def syndrome_ok(code: LiftedCode, hard_bits) -> bool:
    """True iff every constraint is satisfied (zero syndrome)."""
    return not syndrome(code.h, np.asarray(hard_bits, dtype=np.uint8)).any()
