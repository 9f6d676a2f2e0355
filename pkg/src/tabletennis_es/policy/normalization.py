"""Streaming per-feature observation statistics."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

EPS = 1e-8


@dataclass
class RunningStats:
    """Welford mean/variance over the feature axis.

    With no samples the statistics default to mean 0 and variance 1, so
    normalization is the identity.
    """

    dim: int = 11
    count: int = 0
    mean: np.ndarray = field(default=None)
    m2: np.ndarray = field(default=None)

    def __post_init__(self) -> None:
        self.mean = np.zeros(self.dim) if self.mean is None else np.array(self.mean, dtype=float)
        self.m2 = np.zeros(self.dim) if self.m2 is None else np.array(self.m2, dtype=float)

    @property
    def var(self) -> np.ndarray:
        if self.count == 0:
            return np.ones(self.dim)
        return self.m2 / self.count

    @property
    def std(self) -> np.ndarray:
        return np.sqrt(self.var + EPS)

    def normalize(self, obs: np.ndarray) -> np.ndarray:
        return (np.asarray(obs, dtype=float) - self.mean) / self.std

    def update(self, samples: np.ndarray) -> "RunningStats":
        """Fold in rows of ``samples`` (..., dim); returns self."""
        x = np.asarray(samples, dtype=float).reshape(-1, self.dim)
        if x.shape[0] == 0:
            return self
        batch = RunningStats(self.dim, x.shape[0], x.mean(axis=0), ((x - x.mean(axis=0)) ** 2).sum(axis=0))
        return self.merge(batch)

    def merge(self, other: "RunningStats") -> "RunningStats":
        """Chan et al. parallel combination; updates self in place."""
        if other.count == 0:
            return self
        if self.count == 0:
            self.count, self.mean, self.m2 = other.count, other.mean.copy(), other.m2.copy()
            return self
        n = self.count + other.count
        delta = other.mean - self.mean
        self.mean = self.mean + delta * (other.count / n)
        self.m2 = self.m2 + other.m2 + delta * delta * (self.count * other.count / n)
        self.count = n
        return self

    def snapshot(self) -> "RunningStats":
        """Independent copy used as the frozen statistics for one iteration."""
        return RunningStats(self.dim, self.count, self.mean.copy(), self.m2.copy())

    def to_dict(self) -> dict:
        return {"dim": self.dim, "count": self.count, "mean": self.mean.tolist(), "m2": self.m2.tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> "RunningStats":
        return cls(int(d["dim"]), int(d["count"]), np.array(d["mean"], dtype=float), np.array(d["m2"], dtype=float))


def normalize_observation(obs: np.ndarray, stats: RunningStats) -> np.ndarray:
    return stats.normalize(obs)


def update_running_stats(stats: RunningStats, obs: np.ndarray) -> RunningStats:
    return stats.update(obs)
