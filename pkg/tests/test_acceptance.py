"""Acceptance suite: one test per criterion, at the stated tolerances.

Run with `pytest -v tests/test_acceptance.py` (add -s for the per-criterion
summary lines).  The Monte-Carlo criteria use the compiled kernel when
available; every run is seeded and reproducible.
"""

import io
import itertools
import json
import time

import numpy as np
import pytest

from cwgldpc import component as comp
from cwgldpc import evolve as ev
from cwgldpc.cli import main
from cwgldpc.decoder import DecoderConfig, syndrome_ok
from cwgldpc.gf2 import make_encoder
from cwgldpc.lifting import (
    NO_EDGE,
    BaseMatrix,
    lift,
    make_punctured_baseline_base,
    make_scenario_c_like_base,
)
from cwgldpc.simkit import StopRule, run_bler

from helpers import batch_ms_extrinsic, snr_at_bler, wilson_interval

WORKERS = 4


def report(line: str) -> None:
    print(line, flush=True)


def test_criterion_1_sp_matches_map_oracle():
    t0 = time.perf_counter()
    rng = np.random.default_rng(101)
    worst = 0.0
    for n in range(3, 13):
        code = comp.canonical(n)
        for _ in range(1000):
            l = rng.uniform(-10.0, 10.0, n)
            extr = comp.map_oracle(code, l) - l
            err = np.abs(comp.cn_update_sp(code, l) - extr).max()
            worst = max(worst, err)
    elapsed = time.perf_counter() - t0
    assert worst <= 1e-9, worst
    assert elapsed < 30.0, elapsed
    report(f"criterion 1: PASS (max |sp - (map - L)| = {worst:.3e}, {elapsed:.1f}s)")


def test_criterion_2_ms_matches_max_oracle():
    t0 = time.perf_counter()
    rng = np.random.default_rng(102)
    worst = 0.0
    for n in range(3, 13):
        code = comp.canonical(n)
        for _ in range(1000):
            l = rng.uniform(-10.0, 10.0, n)
            extr = comp.max_oracle(code, l) - l
            err = np.abs(comp.cn_update_ms(code, l) - extr).max()
            worst = max(worst, err)
    elapsed = time.perf_counter() - t0
    assert worst <= 1e-12, worst
    assert elapsed < 30.0, elapsed
    report(f"criterion 2: PASS (max |ms - (max - L)| = {worst:.3e}, {elapsed:.1f}s)")


def test_criterion_3_latent_identity():
    # exhaustive over all sign patterns x magnitude orderings for n <= 6
    mismatches = 0
    for n in range(3, 7):
        code = comp.canonical(n)
        for signs in itertools.product((1.0, -1.0), repeat=n):
            for order in itertools.permutations(range(1, n + 1)):
                l = np.array(signs) * np.array(order, dtype=float)
                if not np.array_equal(
                    comp.cn_update_ms(code, l), comp.cn_update_ms_latent(code, l)
                ):
                    mismatches += 1
    assert mismatches == 0
    # plus 1e5 random draws, matching to within one ulp of the working
    # magnitude (the max-form evaluates sums near |l| scale)
    rng = np.random.default_rng(103)
    worst_ratio = 0.0
    for _ in range(100_000):
        n = int(rng.integers(3, 13))
        l = rng.uniform(-10.0, 10.0, n)
        code = comp.canonical(n)
        diff = np.abs(comp.cn_update_ms(code, l) - comp.cn_update_ms_latent(code, l))
        tol = np.spacing(np.abs(l).sum())
        worst_ratio = max(worst_ratio, float(diff.max() / tol))
    assert worst_ratio <= 1.0, worst_ratio
    report(f"criterion 3: PASS (exhaustive exact, random within {worst_ratio:.2f} ulp)")


def test_criterion_4_construction_integrity(tmp_path):
    base_path = tmp_path / "scen_c.bm"
    make_scenario_c_like_base(seed=7).save(base_path)
    out = str(tmp_path / "scen_c.alist")
    assert main(["build", str(base_path), "--out", out]) == 0
    sidecar = json.loads((tmp_path / "scen_c.alist.json").read_text())
    assert sidecar["N"] == 256
    assert sidecar["k"] == 64
    assert sidecar["rate"] == pytest.approx(0.25)
    assert abs(sidecar["avg_col_weight"] - 2.63) <= 0.2
    code = lift(make_scenario_c_like_base(seed=7))
    enc = make_encoder(code.h)
    rng = np.random.default_rng(104)
    for _ in range(100):
        word = enc.encode(rng.integers(0, 2, enc.k).astype(np.uint8))
        assert syndrome_ok(code, word)
    report(
        "criterion 4: PASS (N=256, k=64, rate 0.25, "
        f"avg_col_weight={sidecar['avg_col_weight']:.3f}, 100 codewords valid)"
    )


def test_criterion_5_de_soundness():
    t0 = time.perf_counter()
    grid = ev.LlrGrid()  # default quantization, step 0.05
    rng = np.random.default_rng(105)
    samples = 1_000_000
    worst_tv = 0.0
    for trial in range(5):
        d = int(rng.integers(5, 10))
        base = BaseMatrix(np.zeros((1, d), dtype=int), lift=1)
        state = ev.ProtoState(base, grid, 1.0, alpha=0.75)
        set_density = {}
        for t in range(3):
            mean = rng.uniform(-1.0, 4.0)
            var = rng.uniform(1.0, 9.0)
            set_density[t] = grid.gaussian(mean, var)
        for e in range(d):
            state.v2c[e] = set_density[e % 3].copy()
        de_out = ev.de_cn_update_cw(state, 0)[0]
        draws = np.empty((samples, d))
        for e in range(d):
            draws[:, e] = rng.choice(grid.values, size=samples, p=set_density[e % 3])
        pushed = batch_ms_extrinsic(draws, 0, alpha=0.75)
        # spot-check the vectorized push-through against the scalar rule
        code = comp.canonical(d)
        for row in draws[:100]:
            assert abs(0.75 * comp.cn_update_ms(code, row)[0] - batch_ms_extrinsic(row[None, :], 0, 0.75)[0]) < 1e-12
        emp = np.bincount(grid.index_of(pushed), minlength=grid.size) / samples
        tv = 0.5 * float(np.abs(emp - de_out).sum())
        worst_tv = max(worst_tv, tv)
        assert tv <= 3 * grid.step, (trial, d, tv)
    # error probability decreases monotonically with iterations
    base = make_scenario_c_like_base(seed=7)
    coarse = ev.LlrGrid(step=0.1, l_max=20.0)
    state = ev.ProtoState(base, coarse, 1.5)
    errs = [ev.de_error_prob(state)]
    for _ in range(8):
        ev.de_iterate(state)
        errs.append(ev.de_error_prob(state))
    assert all(b <= a + 1e-12 for a, b in zip(errs, errs[1:]))
    # threshold non-increasing in the iteration budget
    toy = _toy_base()
    t_short = ev.de_threshold(toy, 8, 1e-3, -12.0, 0.0, grid=coarse)
    t_long = ev.de_threshold(toy, 24, 1e-3, -12.0, 0.0, grid=coarse)
    assert t_long <= t_short + 1e-9
    elapsed = time.perf_counter() - t0
    assert elapsed < 300.0, elapsed
    report(
        f"criterion 5: PASS (worst TV = {worst_tv:.4f} <= {3 * grid.step}, "
        f"monotone DE, thresholds {t_short:.2f} -> {t_long:.2f} dB, {elapsed:.0f}s)"
    )


def _toy_base() -> BaseMatrix:
    pat = np.zeros((4, 8), dtype=bool)
    pat[0, [0, 1, 2]] = True
    pat[1, [1, 2, 3]] = True
    pat[2, [4, 5, 6]] = True
    pat[3, [5, 6, 7]] = True
    return BaseMatrix(np.where(pat, 0, NO_EDGE), lift=8)


def test_criterion_6_optimizer_progress():
    t0 = time.perf_counter()
    grid = ev.LlrGrid(step=0.1, l_max=20.0)
    seed_base = _toy_base()
    thr_args = dict(iters=15, target_err=1e-3, lo_db=-12.0, hi_db=0.0, tol_db=0.05, grid=grid)
    thr_seed = ev.de_threshold(seed_base, **thr_args)
    ga = ev.GaConfig(population=16, survivors=4, mutation_rate=0.06, generations=20)
    sched = ev.SnrSchedule(start_db=thr_seed + 0.2, step_db=0.2, target_err=1e-3)
    log = io.StringIO()
    best = ev.optimize(seed_base, ga, sched, seed=123, de_iters=15, grid=grid, log_stream=log)
    best_again = ev.optimize(seed_base, ga, sched, seed=123, de_iters=15, grid=grid)
    assert np.array_equal(best.shifts, best_again.shifts)
    assert len(log.getvalue().strip().splitlines()) == 20
    thr_best = ev.de_threshold(best, **thr_args)
    improvement = thr_seed - thr_best
    elapsed = time.perf_counter() - t0
    assert improvement > 0.0, (thr_seed, thr_best)
    assert elapsed < 600.0, elapsed
    report(
        f"criterion 6: PASS (threshold {thr_seed:.2f} -> {thr_best:.2f} dB, "
        f"improvement {improvement:.2f} dB, deterministic, {elapsed:.0f}s)"
    )


def test_criterion_7_latent_baseline_ordering():
    t0 = time.perf_counter()
    code = lift(make_scenario_c_like_base(seed=7))
    snr = [0.5]  # MS_CW-10 sits at BLER ~1e-2 here
    stop = StopRule(min_block_errors=200, max_blocks=100_000)
    ms = run_bler(
        code, DecoderConfig("ms_cw", "layered", 10), snr, stop, seed=107, workers=WORKERS
    ).points[0]
    lat = run_bler(
        code,
        DecoderConfig("nms_spc", "layered", 10, latent_mode=True),
        snr,
        stop,
        seed=107,
        workers=WORKERS,
    ).points[0]
    assert ms.block_errors >= 200 and lat.block_errors >= 200
    assert 3e-3 <= ms.bler <= 3e-2, ms.bler
    ms_lo, ms_hi = wilson_interval(ms.block_errors, ms.blocks)
    lat_lo, lat_hi = wilson_interval(lat.block_errors, lat.blocks)
    elapsed = time.perf_counter() - t0
    assert lat_lo >= 2.0 * ms_hi, (ms.bler, lat.bler)
    assert elapsed < 1200.0, elapsed
    report(
        f"criterion 7: PASS (MS_CW-10 BLER {ms.bler:.4f} [{ms_lo:.4f},{ms_hi:.4f}], "
        f"latent-10 BLER {lat.bler:.4f} [{lat_lo:.4f},{lat_hi:.4f}], "
        f"ratio {lat.bler / ms.bler:.1f}x, {elapsed:.0f}s)"
    )


def _delta_50_to_10(code, algorithm, points, seed):
    stop = StopRule(min_block_errors=250, max_blocks=120_000)
    crossings = {}
    for iters in (10, 50):
        cfg = DecoderConfig(algorithm, "layered", iters)
        rep = run_bler(code, cfg, points, stop, seed=seed, workers=WORKERS)
        blers = [p.bler for p in rep.points]
        crossings[iters] = snr_at_bler(points, blers, 1e-2)
        assert crossings[iters] is not None, (algorithm, iters, blers)
    return crossings[10] - crossings[50], crossings


def test_criterion_8_convergence_speed_trend():
    t0 = time.perf_counter()
    cw = lift(make_scenario_c_like_base(seed=7))
    delta_cw, cw_x = _delta_50_to_10(
        cw, "ms_cw", [0.0, 0.125, 0.25, 0.375, 0.5, 0.625, 0.75], seed=108
    )
    spc = lift(make_punctured_baseline_base(), kind="spc")
    delta_spc, spc_x = _delta_50_to_10(
        spc, "nms_spc", [-1.0, -0.875, -0.75, -0.625, -0.5, -0.375, -0.25, -0.125, 0.0], seed=108
    )
    elapsed = time.perf_counter() - t0
    report(
        f"criterion 8: CW-GLDPC 50->10 delta {delta_cw:.3f} dB "
        f"(10it @ {cw_x[10]:.3f}, 50it @ {cw_x[50]:.3f}); "
        f"SPC-LDPC baseline delta {delta_spc:.3f} dB "
        f"(10it @ {spc_x[10]:.3f}, 50it @ {spc_x[50]:.3f}); {elapsed:.0f}s"
    )
    assert delta_cw <= 0.3, delta_cw
    assert delta_spc > delta_cw, (delta_spc, delta_cw)
    report("criterion 8: PASS")


def test_criterion_9_simulation_determinism(tmp_path):
    base_path = tmp_path / "scen_c.bm"
    make_scenario_c_like_base(seed=7).save(base_path)
    outputs = {}
    for workers in (1, 4, 8):
        out = tmp_path / f"run_w{workers}"
        cfg = {
            "code": {"base": str(base_path)},
            "decoder": {"algorithm": "ms_cw", "max_iters": 10},
            "sweep": {"points_db": [1.0, 2.0]},
            "stop": {"min_block_errors": 50, "max_blocks": 3000},
            "seed": 109,
            "out": str(out),
        }
        cfg_path = tmp_path / f"cfg_w{workers}.json"
        cfg_path.write_text(json.dumps(cfg))
        assert main(["simulate", "--config", str(cfg_path), "--workers", str(workers)]) == 0
        outputs[workers] = (out.with_suffix(".csv").read_bytes(), out.with_suffix(".json").read_text())
    assert outputs[1][0] == outputs[4][0] == outputs[8][0]
    csv1 = outputs[1][0]
    echo1 = json.loads(outputs[1][1])
    echo4 = json.loads(outputs[4][1])
    echo8 = json.loads(outputs[8][1])
    assert echo1["points"] == echo4["points"] == echo8["points"]
    assert b"," in csv1 and csv1.count(b"\n") == 3
    report("criterion 9: PASS (byte-identical CSVs across workers 1/4/8)")
