"""CW-GLDPC codes: construction, decoding, density evolution, simulation."""

from .component import (
    ComponentCode,
    canonical,
    cn_update_ms,
    cn_update_ms_latent,
    cn_update_sp,
    map_oracle,
    max_oracle,
    weight2_count,
)
from .decoder import DecodeResult, DecoderConfig, decode, decode_latent_baseline, syndrome_ok
from .gf2 import BinMatrix, SystematicEncoder, make_encoder, rank, read_alist, syndrome, write_alist
from .lifting import (
    NO_EDGE,
    BaseMatrix,
    LiftedCode,
    analyze,
    assign_shifts,
    expand_latent_pcm,
    from_pcm,
    lift,
    make_punctured_baseline_base,
    make_scenario_c_like_base,
)
from .simkit import ChannelSpec, SimReport, StopRule, run_bler, transmit

__version__ = "0.1.0"

__all__ = [
    "BaseMatrix",
    "BinMatrix",
    "ChannelSpec",
    "ComponentCode",
    "DecodeResult",
    "DecoderConfig",
    "LiftedCode",
    "NO_EDGE",
    "SimReport",
    "StopRule",
    "SystematicEncoder",
    "analyze",
    "assign_shifts",
    "canonical",
    "cn_update_ms",
    "cn_update_ms_latent",
    "cn_update_sp",
    "decode",
    "decode_latent_baseline",
    "expand_latent_pcm",
    "from_pcm",
    "lift",
    "make_encoder",
    "make_punctured_baseline_base",
    "make_scenario_c_like_base",
    "map_oracle",
    "max_oracle",
    "rank",
    "read_alist",
    "run_bler",
    "syndrome",
    "syndrome_ok",
    "transmit",
    "weight2_count",
    "write_alist",
]
