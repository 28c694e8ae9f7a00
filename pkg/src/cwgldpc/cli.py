"""Command-line interface: build codes, encode, simulate, optimize, analyze.

All randomness flows through explicit seeds (no wall-clock seeding); the
same config and seed give byte-identical outputs regardless of worker
count.  Config files are strict JSON: unknown keys are rejected.

Exit status: 0 on success, 2 for malformed files/configs/usage, 1 for
runtime failures.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import evolve, simkit
from .decoder import DecoderConfig
from .errors import BaseMatrixFormatError, CwgldpcError
from .gf2 import make_encoder, read_alist, write_alist
from .lifting import BaseMatrix, analyze, assign_shifts, from_pcm, lift


class ConfigError(CwgldpcError):
    pass


def _check_keys(d: dict, allowed, where: str) -> None:
    unknown = sorted(set(d) - set(allowed))
    if unknown:
        raise ConfigError(f"{where}: unknown keys {unknown}")


def _require(d: dict, key: str, where: str):
    if key not in d:
        raise ConfigError(f"{where}: missing required key {key!r}")
    return d[key]


def _load_json(path: str) -> dict:
    try:
        with open(path) as f:
            return json.load(f)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON at line {exc.lineno}, column {exc.colno}") from None


def _load_base(path: str, pattern01: bool, shift_seed: int | None, lift_factor: int | None) -> BaseMatrix:
    base = BaseMatrix.load(path)
    if pattern01:
        if not np.isin(base.shifts, (0, 1)).all():
            raise ConfigError(f"{path}: pattern01 file must contain only 0/1 entries")
        if shift_seed is None:
            raise ConfigError("pattern01 input needs a shift seed")
        out = assign_shifts(base.shifts == 1, lift_factor or base.lift, shift_seed)
        return BaseMatrix(out.shifts, out.lift, base.punctured_cols)
    return base


def _load_code(spec: dict, where: str = "config.code"):
    _check_keys(spec, ("base", "alist", "kind", "pattern01", "shift_seed", "punctured"), where)
    kind = spec.get("kind", "cw")
    if kind not in ("cw", "spc"):
        raise ConfigError(f"{where}: kind must be 'cw' or 'spc'")
    if ("base" in spec) == ("alist" in spec):
        raise ConfigError(f"{where}: give exactly one of 'base' or 'alist'")
    if "base" in spec:
        base = _load_base(spec["base"], spec.get("pattern01", False), spec.get("shift_seed"), None)
        return lift(base, kind=kind)
    if kind != "spc":
        raise ConfigError(f"{where}: alist input decodes as spc only")
    return from_pcm(read_alist(spec["alist"]), punctured=spec.get("punctured", ()))


def _decoder_config(spec: dict, where: str = "config.decoder") -> DecoderConfig:
    _check_keys(
        spec, ("algorithm", "schedule", "max_iters", "alpha", "latent_mode", "llr_clamp"), where
    )
    try:
        return DecoderConfig(**spec)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{where}: {exc}") from None


def cmd_build(args) -> int:
    base = _load_base(args.base, args.pattern01, args.seed, args.lift)
    code = lift(base, kind=args.kind)
    write_alist(code.h, args.out)
    report = analyze(code)
    sidecar = {
        "N": code.n,
        "n_tx": code.n_tx,
        "k": code.k,
        "rate": code.k / code.n_tx,
        "avg_col_weight": report["avg_col_weight"],
        "punctured": [int(p) for p in code.punctured],
    }
    with open(args.out + ".json", "w") as f:
        json.dump(sidecar, f, indent=2, sort_keys=True)
        f.write("\n")
    print(json.dumps(sidecar, sort_keys=True))
    return 0


def cmd_encode(args) -> int:
    if args.alist:
        code = from_pcm(read_alist(args.alist))
    else:
        base = _load_base(args.base, args.pattern01, args.seed, None)
        code = lift(base, kind=args.kind)
    enc = make_encoder(code.h)
    if args.message is not None:
        bits = args.message.strip()
        if len(bits) != enc.k or set(bits) - {"0", "1"}:
            raise ConfigError(f"message must be {enc.k} bits of 0/1, got {len(bits)} chars")
        message = np.frombuffer(bits.encode(), dtype=np.uint8) - ord("0")
    else:
        if args.seed is None:
            raise ConfigError("--random needs --seed")
        message = np.random.default_rng(args.seed).integers(0, 2, enc.k).astype(np.uint8)
    word = enc.encode(message)
    text = "".join(map(str, word))
    if args.out:
        with open(args.out, "w") as f:
            f.write(text + "\n")
    else:
        print(text)
    return 0


def _seed_and_out(cfg: dict, args) -> tuple[int, str]:
    """Seed and output path, from flags or config (flags win); both required
    somewhere - there is no wall-clock seeding."""
    seed = args.seed if args.seed is not None else cfg.get("seed")
    if seed is None:
        raise ConfigError("seed required (config 'seed' or --seed)")
    out = args.out if getattr(args, "out", None) else cfg.get("out")
    if out is None:
        raise ConfigError("output path required (config 'out' or --out)")
    return int(seed), out


def cmd_simulate(args) -> int:
    cfg = _load_json(args.config)
    _check_keys(cfg, ("code", "decoder", "sweep", "stop", "seed", "out", "batch_size"), "config")
    code = _load_code(_require(cfg, "code", "config"))
    dec = _decoder_config(_require(cfg, "decoder", "config"))
    sweep = _require(cfg, "sweep", "config")
    if "points_db" in sweep:
        _check_keys(sweep, ("points_db",), "config.sweep")
        points = [float(x) for x in sweep["points_db"]]
    else:
        _check_keys(sweep, ("start_db", "stop_db", "step_db"), "config.sweep")
        points = simkit.sweep_points(
            _require(sweep, "start_db", "config.sweep"),
            _require(sweep, "stop_db", "config.sweep"),
            _require(sweep, "step_db", "config.sweep"),
        )
    stop_spec = cfg.get("stop", {})
    _check_keys(stop_spec, ("min_block_errors", "max_blocks"), "config.stop")
    stop = simkit.StopRule(**stop_spec)
    seed, out = _seed_and_out(cfg, args)
    workers = args.workers if args.workers else (os.cpu_count() or 1)
    report = simkit.run_bler(
        code, dec, points, stop, seed,
        workers=workers, batch_size=int(cfg.get("batch_size", 512)),
    )
    report.config = {k: v for k, v in cfg.items() if k != "out"}
    simkit.write_report(report, out, code.n)
    print(report.to_csv(code.n), end="")
    return 0


def cmd_de(args) -> int:
    base = _load_base(args.base, args.pattern01, args.seed, None)
    grid = evolve.LlrGrid(step=args.grid_step, l_max=args.grid_max)
    threshold = evolve.de_threshold(
        base,
        iters=args.iters,
        target_err=args.target_err,
        lo_db=args.lo_db,
        hi_db=args.hi_db,
        tol_db=args.tol_db,
        grid=grid,
        alpha=args.alpha,
        kind=args.kind,
    )
    result = {
        "threshold_db": threshold,
        "iters": args.iters,
        "target_err": args.target_err,
        "alpha": args.alpha,
        "kind": args.kind,
    }
    text = json.dumps(result, sort_keys=True)
    if args.out:
        with open(args.out, "w") as f:
            f.write(text + "\n")
    print(text)
    return 0


def cmd_optimize(args) -> int:
    cfg = _load_json(args.config)
    _check_keys(
        cfg, ("base", "pattern01", "shift_seed", "kind", "ga", "snr", "de", "seed", "out", "log"),
        "config",
    )
    base = _load_base(
        _require(cfg, "base", "config"), cfg.get("pattern01", False), cfg.get("shift_seed"), None
    )
    ga_spec = cfg.get("ga", {})
    _check_keys(ga_spec, ("population", "survivors", "mutation_rate", "generations"), "config.ga")
    ga = evolve.GaConfig(**ga_spec)
    snr_spec = _require(cfg, "snr", "config")
    _check_keys(snr_spec, ("start_db", "step_db", "target_err"), "config.snr")
    schedule = evolve.SnrSchedule(**snr_spec)
    de_spec = cfg.get("de", {})
    _check_keys(de_spec, ("iters", "alpha", "grid_step", "grid_max"), "config.de")
    grid = evolve.LlrGrid(
        step=de_spec.get("grid_step", 0.05), l_max=de_spec.get("grid_max", 30.0)
    )
    seed, out = _seed_and_out(cfg, args)
    log_stream = open(cfg["log"], "w") if "log" in cfg else None
    try:
        best = evolve.optimize(
            base,
            ga,
            schedule,
            seed=seed,
            de_iters=de_spec.get("iters", 30),
            grid=grid,
            alpha=de_spec.get("alpha", 0.75),
            kind=cfg.get("kind", "cw"),
            log_stream=log_stream,
        )
    finally:
        if log_stream is not None:
            log_stream.close()
    best.save(out)
    print(json.dumps({"out": out, "rows": best.rows, "cols": best.cols, "lift": best.lift}))
    return 0


def cmd_analyze(args) -> int:
    if args.alist:
        code = from_pcm(read_alist(args.alist))
    else:
        base = _load_base(args.base, args.pattern01, args.seed, None)
        code = lift(base, kind=args.kind)
    report = analyze(code)
    report.update(
        {"N": code.n, "n_tx": code.n_tx, "k": code.k, "rate": code.k / code.n_tx, "kind": code.kind}
    )
    text = json.dumps(report, sort_keys=True)
    if args.out:
        with open(args.out, "w") as f:
            f.write(text + "\n")
    print(text)
    return 0


def _add_code_source(p, base_required: bool) -> None:
    p.add_argument("--base", required=base_required, help="base-matrix file")
    p.add_argument("--kind", choices=("cw", "spc"), default="cw")
    p.add_argument("--pattern01", action="store_true",
                   help="treat base entries as 0/1 adjacency; assign seeded shifts")
    p.add_argument("--seed", type=int, default=None)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="cwgldpc", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build", help="expand a base matrix; write alist + JSON sidecar")
    p.add_argument("base", help="base-matrix file")
    p.add_argument("--out", required=True)
    p.add_argument("--kind", choices=("cw", "spc"), default="cw")
    p.add_argument("--pattern01", action="store_true")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--lift", type=int, default=None, help="override lift for pattern01 input")
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("encode", help="encode a message into a codeword")
    _add_code_source(p, base_required=False)
    p.add_argument("--alist", default=None)
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--message", help="0/1 string of k bits")
    g.add_argument("--random", action="store_true", help="random message from --seed")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_encode)

    p = sub.add_parser("simulate", help="Monte-Carlo BLER sweep from a JSON config")
    p.add_argument("--config", required=True)
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--seed", type=int, default=None, help="overrides the config seed")
    p.add_argument("--out", default=None, help="overrides the config output path")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("de", help="density-evolution threshold of a base matrix")
    _add_code_source(p, base_required=True)
    p.add_argument("--iters", type=int, default=30)
    p.add_argument("--target-err", type=float, default=1e-4)
    p.add_argument("--lo-db", type=float, required=True)
    p.add_argument("--hi-db", type=float, required=True)
    p.add_argument("--tol-db", type=float, default=0.05)
    p.add_argument("--alpha", type=float, default=0.75)
    p.add_argument("--grid-step", type=float, default=0.05)
    p.add_argument("--grid-max", type=float, default=30.0)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_de)

    p = sub.add_parser("optimize", help="genetic base-matrix search from a JSON config")
    p.add_argument("--config", required=True)
    p.add_argument("--seed", type=int, default=None, help="overrides the config seed")
    p.add_argument("--out", default=None, help="overrides the config output path")
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("analyze", help="structural report of a code")
    _add_code_source(p, base_required=False)
    p.add_argument("--alist", default=None)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_analyze)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, BaseMatrixFormatError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except CwgldpcError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
