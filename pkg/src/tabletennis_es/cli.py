"""Command-line entry point: ``ttes train | eval | bench``."""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import time
from dataclasses import replace
from pathlib import Path

import numpy as np

from .config import ConfigError, RunConfig, load_config, shipped_config
from .es.pool import WorkerFailure, WorkerPool
from .es.train import Trainer, latest_checkpoint
from .evaluation.report import evaluate_policy
from .policy.checkpoint import CheckpointError, load_checkpoint
from .rollout import PolicyController, run_episodes

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME, EXIT_INTERRUPTED = 0, 2, 3, 4
OUT_ENV = "TTES_OUT"
BENCH_SCHEMA = 1
RANDOM_POLICY = "random-policy"
QUICK_EPISODES = 10

log = logging.getLogger("ttes")


def _out_dir(args, cfg: RunConfig) -> Path:
    if args.out:
        return Path(args.out)
    if os.environ.get(OUT_ENV):
        return Path(os.environ[OUT_ENV])
    return Path(cfg.out_dir)


def _config(path: str | None, default: str) -> RunConfig:
    return load_config(path if path else shipped_config(default))


def random_policy_path() -> Path:
    return Path(__file__).parent / "data" / "random_policy.json"


# -- train --------------------------------------------------------------------------------


def run_train(args) -> int:
    cfg = load_config(args.config)
    out = _out_dir(args, cfg)
    tcfg = cfg.train_config(out_dir=str(out), workers=args.workers, seed=args.seed)
    if args.iterations is not None:
        tcfg.es = replace(tcfg.es, iterations=args.iterations)
    with WorkerPool(tcfg.workers) as pool:
        trainer = Trainer(tcfg, pool)
        if args.resume:
            path = Path(args.resume)
            if path.is_dir():
                found = latest_checkpoint(path)
                if found is None:
                    raise CheckpointError(f"no checkpoints under {path}")
                path = found
            trainer.restore(path)
            log.info("resumed from %s at iteration %d", path, trainer.iteration)
        trainer.run()
    print(f"trained to iteration {trainer.iteration}; outputs in {out}")
    return EXIT_INTERRUPTED if trainer.interrupted else EXIT_OK


# -- eval ---------------------------------------------------------------------------------


def run_eval(args) -> int:
    cfg = _config(args.config, "forehand-sparse")
    ckpt_path = random_policy_path() if args.checkpoint == RANDOM_POLICY else Path(args.checkpoint)
    ckpt = load_checkpoint(ckpt_path, expect=cfg.arch)
    n = QUICK_EPISODES if args.quick else (args.episodes or cfg.eval.episodes)
    seed = cfg.eval.seed if args.seed is None else args.seed
    report = evaluate_policy(ckpt.theta, ckpt.arch, cfg.env, n=n, seed=seed, stats=ckpt.stats,
                             workers=args.workers or cfg.workers, chunk_size=cfg.train.chunk_size,
                             reduction=cfg.eval.reduction)
    json_path, csv_path = report.write(_out_dir(args, cfg))
    print(report.format())
    print(f"wrote {json_path} and {csv_path}")
    return EXIT_OK


# -- bench --------------------------------------------------------------------------------


def _bench_task(task):
    cfg, theta, seeds = task
    ctrl = PolicyController(cfg.arch, theta, None, cfg.env.robot.velocity_array)
    return len(run_episodes(cfg.env, seeds, ctrl, sample_every=0).records)


def run_bench(args) -> int:
    cfg = _config(args.config, "forehand-sparse")
    counts = list(cfg.bench.workers)
    if args.workers:
        counts = [w for w in (1, 2, 4, 8, 16, 32) if w <= args.workers]
    n = QUICK_EPISODES if args.quick else (args.episodes or cfg.bench.episodes)
    theta = np.zeros(cfg.arch.num_params)
    results = []
    for workers in counts:
        per = max(1, -(-n // workers))
        tasks = [(cfg, theta, [[cfg.seed, i, 11] for i in range(s, min(s + per, n))]) for s in range(0, n, per)]
        with WorkerPool(workers) as pool:
            pool.map(_bench_task, tasks[:1])  # warm the workers up
            start = time.perf_counter()
            done = sum(pool.map(_bench_task, tasks))
            elapsed = time.perf_counter() - start
        results.append({"workers": workers, "episodes": done, "seconds": elapsed,
                        "episodes_per_second": done / elapsed if elapsed > 0 else float("inf")})
        print(f"{workers:3d} workers: {done / elapsed:8.1f} episodes/s")
    out = _out_dir(args, cfg)
    out.mkdir(parents=True, exist_ok=True)
    path = out / "bench.json"
    path.write_text(json.dumps({"schema": BENCH_SCHEMA, "cpu_count": os.cpu_count(), "results": results}, indent=1))
    print(f"wrote {path}")
    return EXIT_OK


def read_bench(path: str | Path) -> dict:
    d = json.loads(Path(path).read_text())
    if d.get("schema") != BENCH_SCHEMA or not isinstance(d.get("results"), list):
        raise ValueError(f"{path}: not a schema-{BENCH_SCHEMA} bench report")
    for row in d["results"]:
        if set(row) != {"workers", "episodes", "seconds", "episodes_per_second"}:
            raise ValueError(f"{path}: malformed row {row}")
    return d


# -- entry ---------------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ttes", description="Evolution-strategy training of table-tennis controllers.")
    parser.add_argument("-v", "--verbose", action="store_true", help="log every iteration")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, config_required: bool) -> None:
        p.add_argument("--config", required=config_required, help="YAML run configuration")
        p.add_argument("--workers", type=int, help="rollout worker processes")
        p.add_argument("--seed", type=int, help="override the configured seed")
        p.add_argument("--out", help=f"output directory (else ${OUT_ENV}, else out_dir from the config)")

    t = sub.add_parser("train", help="run ES training")
    common(t, True)
    t.add_argument("--resume", help="checkpoint file or run directory to continue from")
    t.add_argument("--iterations", type=int, help="override es.iterations")

    e = sub.add_parser("eval", help="evaluate a checkpoint")
    common(e, False)
    e.add_argument("--checkpoint", required=True, help=f"checkpoint file, or '{RANDOM_POLICY}' for the bundled fixture")
    e.add_argument("--episodes", type=int, help="number of episodes (default from config)")
    e.add_argument("--quick", action="store_true", help=f"evaluate {QUICK_EPISODES} episodes")

    b = sub.add_parser("bench", help="measure rollout throughput")
    common(b, False)
    b.add_argument("--episodes", type=int, help="episodes per measurement")
    b.add_argument("--quick", action="store_true", help=f"use {QUICK_EPISODES} episodes")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    handlers = {"train": run_train, "eval": run_eval, "bench": run_bench}
    try:
        return handlers[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (CheckpointError, WorkerFailure, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except KeyboardInterrupt:
        print("interrupted", file=sys.stderr)
        return EXIT_INTERRUPTED


if __name__ == "__main__":
    sys.exit(main())
