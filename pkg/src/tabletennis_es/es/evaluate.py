"""Fitness evaluation: episodes grouped into fixed-size chunks for the worker pool."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..policy.arch import ArchSpec
from ..policy.normalization import RunningStats
from ..rewards.terms import TERMS, RewardConfig, total_reward
from ..rollout import PolicyController, run_episodes
from ..sim.env import EnvConfig


@dataclass
class ChunkTask:
    env: EnvConfig
    reward: RewardConfig
    arch: ArchSpec
    stats: RunningStats | None
    thetas: np.ndarray
    seeds: list
    sample_every: int = 10


@dataclass
class ChunkResult:
    rewards: np.ndarray
    breakdown: np.ndarray
    hit: np.ndarray
    success: np.ndarray
    samples: np.ndarray


def run_chunk(task: ChunkTask) -> ChunkResult:
    """Play one episode per (theta row, seed) pair and score it."""
    ctrl = PolicyController(task.arch, task.thetas, task.stats, task.env.robot.velocity_array)
    res = run_episodes(task.env, task.seeds, ctrl, sample_every=task.sample_every)
    totals = []
    parts = []
    for rec in res.records:
        total, breakdown = total_reward(rec, task.reward)
        totals.append(total)
        parts.append([breakdown[k] for k in TERMS])
    samples = np.concatenate(res.samples) if res.samples else np.zeros((0, task.arch.features))
    return ChunkResult(
        rewards=np.array(totals),
        breakdown=np.array(parts).reshape(len(totals), len(TERMS)),
        hit=np.array([r.hit for r in res.records]),
        success=np.array([r.success for r in res.records]),
        samples=samples,
    )


def make_chunks(
    env: EnvConfig,
    reward: RewardConfig,
    arch: ArchSpec,
    stats: RunningStats | None,
    thetas: np.ndarray,
    seeds: list,
    chunk_size: int,
    sample_every: int = 10,
) -> list[ChunkTask]:
    """Split episode-aligned rows of parameters and seeds into consecutive chunks."""
    thetas = np.asarray(thetas, dtype=float)
    return [
        ChunkTask(env, reward, arch, stats, thetas[i:i + chunk_size], seeds[i:i + chunk_size], sample_every)
        for i in range(0, len(seeds), chunk_size)
    ]


def merge_results(results: list[ChunkResult]) -> ChunkResult:
    return ChunkResult(
        rewards=np.concatenate([r.rewards for r in results]),
        breakdown=np.concatenate([r.breakdown for r in results]),
        hit=np.concatenate([r.hit for r in results]),
        success=np.concatenate([r.success for r in results]),
        samples=np.concatenate([r.samples for r in results]),
    )


def evaluate_candidate(
    theta: np.ndarray,
    env: EnvConfig,
    reward: RewardConfig,
    arch: ArchSpec,
    m: int,
    seeds: list,
    stats: RunningStats | None = None,
) -> tuple[float, dict[str, float], np.ndarray]:
    """Mean total reward of ``theta`` over ``m`` episodes, the mean breakdown and the state samples."""
    if len(seeds) != m:
        raise ValueError(f"need {m} seeds, got {len(seeds)}")
    rows = np.repeat(np.asarray(theta, dtype=float)[None], m, axis=0)
    res = run_chunk(ChunkTask(env, reward, arch, stats, rows, list(seeds)))
    breakdown = dict(zip(TERMS, res.breakdown.mean(axis=0).tolist()))
    return float(res.rewards.mean()), breakdown, res.samples
