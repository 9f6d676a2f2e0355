"""Smoothness statistics of joint trajectories."""

from __future__ import annotations

import numpy as np

from ..rewards.record import EpisodeRecord

REDUCTIONS = ("max", "mean")


def smoothness_metrics(rec: EpisodeRecord, reduction: str = "max") -> tuple[float, float, float, float]:
    """(J, A, V, JR) for one episode.

    With ``reduction="max"`` each joint contributes the maximum over time of
    |jerk|, |acceleration| and |velocity|, and J, A, V are averages over
    joints. ``"mean"`` averages over time instead of taking the maximum. JR
    sums the per-joint range of positions.
    """
    if reduction not in REDUCTIONS:
        raise ValueError(f"reduction must be one of {REDUCTIONS}")
    if rec.steps < 3:
        raise ValueError(f"jerk needs at least 3 steps, episode has {rec.steps}")
    reduce = np.max if reduction == "max" else np.mean
    out = [float(np.mean(reduce(np.abs(d), axis=0))) for d in (rec.jerk, rec.acceleration, rec.velocity)]
    jr = float(np.sum(rec.q.max(axis=0) - rec.q.min(axis=0)))
    return out[0], out[1], out[2], jr
