"""Antithetic evolution-strategy gradient estimates and updates."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

SIGMA_R_FLOOR = 1e-8


@dataclass(frozen=True)
class ESConfig:
    sigma: float = 0.02
    lr: float = 0.01
    n_pairs: int = 64
    top_b: int = 32
    rollouts: int = 2
    iterations: int = 300
    seed: int = 0
    reward_norm: bool = True

    def __post_init__(self) -> None:
        if self.sigma <= 0 or self.lr <= 0:
            raise ValueError("sigma and lr must be positive")
        if not 0 < self.top_b <= self.n_pairs:
            raise ValueError(f"need 0 < top_b <= n_pairs, got top_b={self.top_b}, n_pairs={self.n_pairs}")
        if self.rollouts < 1 or self.iterations < 0:
            raise ValueError("rollouts must be >= 1 and iterations >= 0")


def iteration_rng(seed: int, iteration: int, stream: int = 0) -> np.random.Generator:
    """Independent generator for one (run seed, iteration, purpose) triple."""
    return np.random.default_rng(np.random.SeedSequence([seed, iteration, stream]))


def sample_perturbations(n: int, dim: int, rng: np.random.Generator) -> np.ndarray:
    """n standard-normal directions, shape (n, dim)."""
    return rng.standard_normal((n, dim))


@dataclass
class UpdateInfo:
    gradient: np.ndarray
    sigma_r: float
    used: np.ndarray


def estimate_gradient(
    directions: np.ndarray, f_plus: np.ndarray, f_minus: np.ndarray, cfg: ESConfig
) -> UpdateInfo:
    """Top-b filtered antithetic estimate.

    Pairs are ranked by max(F+, F-) (ties keep index order). With reward
    normalization the sum is divided by b * std of the 2b kept fitnesses, and
    a near-zero spread yields a zero update. Without it the divisor is
    2 * b * sigma, which makes the estimate unbiased for linear objectives.
    """
    f_plus = np.asarray(f_plus, dtype=float)
    f_minus = np.asarray(f_minus, dtype=float)
    b = cfg.top_b
    order = np.argsort(-np.maximum(f_plus, f_minus), kind="stable")[:b]
    used = np.sort(order)
    diff = f_plus[used] - f_minus[used]
    if cfg.reward_norm:
        sigma_r = float(np.std(np.concatenate([f_plus[used], f_minus[used]])))
        if sigma_r < SIGMA_R_FLOOR:
            return UpdateInfo(np.zeros(directions.shape[1]), sigma_r, used)
        scale = 1.0 / (b * sigma_r)
    else:
        sigma_r = cfg.sigma
        scale = 1.0 / (2.0 * b * cfg.sigma)
    return UpdateInfo(scale * (diff @ directions[used]), sigma_r, used)


def es_update(
    theta: np.ndarray, directions: np.ndarray, f_plus: np.ndarray, f_minus: np.ndarray, cfg: ESConfig
) -> tuple[np.ndarray, UpdateInfo]:
    """One plain gradient-ascent step; returns (new theta, update diagnostics)."""
    info = estimate_gradient(directions, f_plus, f_minus, cfg)
    return np.asarray(theta, dtype=float) + cfg.lr * info.gradient, info


def optimize(
    objective: Callable[[np.ndarray], np.ndarray],
    theta0: np.ndarray,
    cfg: ESConfig,
    callback: Callable[[int, np.ndarray], None] | None = None,
) -> np.ndarray:
    """Maximize a vectorized objective (rows of candidates -> fitness per row)."""
    theta = np.array(theta0, dtype=float)
    for it in range(cfg.iterations):
        g = sample_perturbations(cfg.n_pairs, theta.size, iteration_rng(cfg.seed, it))
        fit = np.asarray(objective(np.concatenate([theta + cfg.sigma * g, theta - cfg.sigma * g])), dtype=float)
        theta, _ = es_update(theta, g, fit[: cfg.n_pairs], fit[cfg.n_pairs:], cfg)
        if callback is not None:
            callback(it, theta)
    return theta
