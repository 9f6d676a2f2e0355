"""ES training loop with curriculum, probes, metrics and checkpoints."""

from __future__ import annotations

import csv
import logging
import math
import signal
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable

import numpy as np

from ..policy.arch import INIT_SCHEMES, ArchSpec, initial_params
from ..policy.checkpoint import Checkpoint, load_checkpoint, save_checkpoint
from ..policy.normalization import RunningStats
from ..rewards.curriculum import CurriculumStage, CurriculumState, advance_curriculum
from ..rewards.terms import RewardConfig
from ..sim.env import EnvConfig
from .core import ESConfig, es_update, iteration_rng, sample_perturbations
from .evaluate import make_chunks, merge_results, run_chunk
from .pool import WorkerPool

log = logging.getLogger(__name__)

METRICS_VERSION = 1
METRICS_COLUMNS = ("iteration", "mean_fitness", "max_fitness", "sigma_r", "probe_success", "probe_hit", "stage_id")

# SeedSequence stream ids inside one iteration.
_DIRECTIONS, _EPISODES, _PROBES = 0, 1, 2


@dataclass
class TrainConfig:
    es: ESConfig = field(default_factory=ESConfig)
    arch: ArchSpec = field(default_factory=ArchSpec)
    env: EnvConfig = field(default_factory=EnvConfig)
    stages: list[CurriculumStage] = field(default_factory=list)
    workers: int = 1
    # Episodes per pool task. Fixed independently of the worker count so that
    # results are bitwise identical for any number of workers.
    chunk_size: int = 64
    probe_episodes: int = 32
    probe_every: int = 1
    checkpoint_every: int = 10
    sample_every: int = 10
    normalize_states: bool = True
    # Starting parameters: "zeros" or "output_zero" (see policy.arch.initial_params).
    init: str = "zeros"
    out_dir: str = "runs/default"

    def __post_init__(self) -> None:
        if self.workers < 1 or self.chunk_size < 1:
            raise ValueError("workers and chunk_size must be >= 1")
        if self.probe_episodes < 0 or self.probe_every < 1 or self.checkpoint_every < 1:
            raise ValueError("probe_episodes >= 0, probe_every >= 1 and checkpoint_every >= 1 required")
        if self.init not in INIT_SCHEMES:
            raise ValueError(f"init must be one of {INIT_SCHEMES}, got {self.init!r}")

    def stage_list(self) -> list[CurriculumStage]:
        if self.stages:
            return self.stages
        return [CurriculumStage(0, self.env.distribution, RewardConfig().with_robot(self.env.robot))]


@dataclass
class IterationResult:
    iteration: int
    mean_fitness: float
    max_fitness: float
    sigma_r: float
    probe_success: float
    probe_hit: float
    stage_id: int

    def row(self) -> list:
        return [self.iteration, repr(self.mean_fitness), repr(self.max_fitness), repr(self.sigma_r),
                "" if math.isnan(self.probe_success) else repr(self.probe_success),
                "" if math.isnan(self.probe_hit) else repr(self.probe_hit), self.stage_id]


def checkpoint_path(out_dir: str | Path, iteration: int) -> Path:
    return Path(out_dir) / "checkpoints" / f"ckpt_{iteration:06d}.json"


def latest_checkpoint(out_dir: str | Path) -> Path | None:
    found = sorted((Path(out_dir) / "checkpoints").glob("ckpt_*.json"))
    return found[-1] if found else None


class Trainer:
    """Holds the optimizer state (theta, statistics, curriculum position)."""

    def __init__(self, cfg: TrainConfig, pool: WorkerPool | None = None) -> None:
        self.cfg = cfg
        self.stages = cfg.stage_list()
        self.theta = initial_params(cfg.arch, cfg.init, cfg.es.seed)
        self.stats = RunningStats(cfg.arch.features)
        self.curriculum = CurriculumState()
        self.iteration = 0
        self.pool = pool or WorkerPool(cfg.workers)
        self.interrupted = False

    # -- state ----------------------------------------------------------------------------

    def checkpoint(self) -> Checkpoint:
        return Checkpoint(
            self.cfg.arch, self.theta.copy(), self.stats.snapshot(), self.stages[self.curriculum.index].stage_id,
            self.iteration, extra={"stage_index": self.curriculum.index, "stage_entered": self.curriculum.entered_at,
                                   "seed": self.cfg.es.seed},
        )

    def save(self) -> Path:
        return save_checkpoint(self.checkpoint(), checkpoint_path(self.cfg.out_dir, self.iteration))

    def restore(self, path: str | Path) -> None:
        ckpt = load_checkpoint(path, expect=self.cfg.arch)
        self.theta = ckpt.theta
        self.stats = ckpt.stats
        self.iteration = ckpt.iteration
        index = int(ckpt.extra.get("stage_index", 0))
        if index >= len(self.stages):
            raise ValueError(f"checkpoint stage index {index} exceeds the configured {len(self.stages)} stages")
        self.curriculum = CurriculumState(index, int(ckpt.extra.get("stage_entered", 0)))

    @property
    def stage(self) -> CurriculumStage:
        return self.stages[self.curriculum.index]

    def stage_env(self) -> EnvConfig:
        return replace(self.cfg.env, distribution=self.stage.distribution)

    # -- one update -------------------------------------------------------------------------

    def step(self) -> IterationResult:
        """Run one ES iteration; self.iteration counts completed updates."""
        cfg = self.cfg
        es = cfg.es
        k = self.iteration + 1
        n, m = es.n_pairs, es.rollouts
        env = self.stage_env()
        reward = self.stage.reward
        stats = self.stats.snapshot() if cfg.normalize_states else None

        g = sample_perturbations(n, self.theta.size, iteration_rng(es.seed, k, _DIRECTIONS))
        candidates = np.concatenate([self.theta + es.sigma * g, self.theta - es.sigma * g])
        # Both members of a pair see the same m episodes.
        rows = np.repeat(candidates, m, axis=0)
        seeds = [[es.seed, k, _EPISODES, c % n, j] for c in range(2 * n) for j in range(m)]
        tasks = make_chunks(env, reward, cfg.arch, stats, rows, seeds, cfg.chunk_size, cfg.sample_every)
        result = merge_results(self.pool.map(run_chunk, tasks))

        fitness = result.rewards.reshape(2 * n, m).mean(axis=1)
        self.theta, info = es_update(self.theta, g, fitness[:n], fitness[n:], es)
        if cfg.normalize_states:
            self.stats.update(result.samples)
        self.iteration = k

        probe_success = probe_hit = float("nan")
        if cfg.probe_episodes and k % cfg.probe_every == 0:
            probe_success, probe_hit = self.probe(k)
        stage_id = self.stage.stage_id
        self.curriculum = advance_curriculum(
            self.stages, self.curriculum, k, None if math.isnan(probe_success) else probe_success
        )
        return IterationResult(k, float(fitness.mean()), float(fitness.max()), info.sigma_r,
                               probe_success, probe_hit, stage_id)

    def probe(self, k: int) -> tuple[float, float]:
        """Success and hit rate of the current parameters on fresh episodes."""
        cfg = self.cfg
        count = cfg.probe_episodes
        seeds = [[cfg.es.seed, k, _PROBES, e] for e in range(count)]
        rows = np.repeat(self.theta[None], count, axis=0)
        stats = self.stats.snapshot() if cfg.normalize_states else None
        tasks = make_chunks(self.stage_env(), self.stage.reward, cfg.arch, stats, rows, seeds, cfg.chunk_size, 0)
        res = merge_results(self.pool.map(run_chunk, tasks))
        return float(res.success.mean()), float(res.hit.mean())

    # -- loop --------------------------------------------------------------------------------

    def run(self, iterations: int | None = None, on_iteration: Callable[[IterationResult], None] | None = None) -> int:
        """Train until ``iterations`` total updates (default: the ES config). Returns updates done now."""
        target = self.cfg.es.iterations if iterations is None else iterations
        out = Path(self.cfg.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        metrics = out / "metrics.csv"
        fresh = not metrics.exists() or self.iteration == 0
        if fresh:
            with metrics.open("w", newline="") as fh:
                csv.writer(fh).writerow(METRICS_COLUMNS)
        else:
            _truncate_metrics(metrics, self.iteration)

        previous = signal.getsignal(signal.SIGINT)
        try:
            signal.signal(signal.SIGINT, self._on_sigint)
        except ValueError:  # not the main thread
            previous = None
        done = 0
        try:
            while self.iteration < target and not self.interrupted:
                res = self.step()
                done += 1
                with metrics.open("a", newline="") as fh:
                    csv.writer(fh).writerow(res.row())
                log.info("iter %d fitness %.4f max %.4f probe S %.3f H %.3f stage %d", res.iteration,
                         res.mean_fitness, res.max_fitness, res.probe_success, res.probe_hit, res.stage_id)
                if on_iteration is not None:
                    on_iteration(res)
                if self.iteration % self.cfg.checkpoint_every == 0:
                    self.save()
            if done or self.iteration == 0 or self.interrupted:
                self.save()
        finally:
            if previous is not None:
                signal.signal(signal.SIGINT, previous)
        return done

    def _on_sigint(self, signum, frame) -> None:
        log.warning("interrupt received; finishing the current iteration and saving a checkpoint")
        self.interrupted = True


def _truncate_metrics(path: Path, iteration: int) -> None:
    """Drop rows past ``iteration`` so a resumed run does not duplicate them."""
    with path.open(newline="") as fh:
        rows = list(csv.reader(fh))
    kept = [rows[0]] + [r for r in rows[1:] if r and int(r[0]) <= iteration]
    with path.open("w", newline="") as fh:
        csv.writer(fh).writerows(kept)


def read_metrics(path: str | Path) -> list[dict]:
    with Path(path).open(newline="") as fh:
        return list(csv.DictReader(fh))
