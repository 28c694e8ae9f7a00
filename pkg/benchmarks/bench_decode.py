#!/usr/bin/env python3
"""Throughput of the compiled decode kernel vs the pure-NumPy fallback.

Example:
    python benchmarks/bench_decode.py --blocks 400 --iters 10
"""

import argparse
import time

import numpy as np

from cwgldpc import kernels
from cwgldpc.decoder import _graph_arrays
from cwgldpc.kernels import _fallback
from cwgldpc.lifting import latent_spc_code, lift, make_scenario_c_like_base


def bench(impl, arrays, n, rule, sched, iters, blocks, zero_tail=0):
    rng = np.random.default_rng(1)
    cn_ptr, edge_col, _, layer_size, hrow_ptr, hrow_col = arrays
    t0 = time.perf_counter()
    for _ in range(blocks):
        channel = rng.normal(1.6, 1.8, n)
        if zero_tail:
            channel[-zero_tail:] = 0.0
        impl.decode_mp(
            cn_ptr, edge_col, n, channel, rule, sched, iters, 0.75, 50.0,
            layer_size, hrow_ptr, hrow_col, None,
        )
    return (time.perf_counter() - t0) / blocks


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--blocks", type=int, default=400)
    ap.add_argument("--iters", type=int, default=10)
    args = ap.parse_args()

    impls = [("fallback", _fallback)]
    if kernels.HAVE_COMPILED:
        from cwgldpc.kernels import _speed

        impls.append(("compiled", _speed))
    else:
        print("note: compiled kernel not available; benchmarking fallback only")

    code = lift(make_scenario_c_like_base(seed=7))
    latent = latent_spc_code(code)
    cases = [
        ("ms_cw      ", _graph_arrays(code), code.n, kernels.RULE_MS_CW, 0),
        ("sp_hr      ", _graph_arrays(code), code.n, kernels.RULE_SP_HR, 0),
        ("nms latent ", _graph_arrays(latent), latent.n, kernels.RULE_NMS_SPC, code.m_cn),
    ]
    print(f"[256,64] code, {args.iters} layered iterations, {args.blocks} blocks/case")
    print(f"{'case':12s} " + " ".join(f"{name:>14s}" for name, _ in impls) + "   speedup")
    for label, arrays, n, rule, zero_tail in cases:
        times = [
            bench(impl, arrays, n, rule, 1, args.iters, args.blocks, zero_tail)
            for _, impl in impls
        ]
        cols = " ".join(f"{t * 1e3:11.3f} ms" for t in times)
        speed = f"{times[0] / times[-1]:9.1f}x" if len(times) > 1 else ""
        print(f"{label:12s} {cols}{speed}")


if __name__ == "__main__":
    main()
