"""Ball-throw distributions and rejection sampling of launches."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .ball import UnsolvableThrowError, solve_throw

FOREHAND = "forehand"
BACKHAND = "backhand"
CENTER = "center"

FOREHAND_X1 = (-0.2, 0.7)
FULL_TABLE_X1 = (-0.7, 0.7)
VY_BAND = (-8.5, -3.5)


class ThrowConfigError(ValueError):
    """Sampling bounds cannot produce throws inside the accepted vy band."""


@dataclass(frozen=True)
class ThrowSpec:
    start: np.ndarray
    target: tuple[float, float]
    velocity: np.ndarray

    @property
    def side(self) -> str:
        return side_of(self.target[0])


def side_of(x: float) -> str:
    if x > 0:
        return FOREHAND
    if x < 0:
        return BACKHAND
    return CENTER


@dataclass(frozen=True)
class BallDistribution:
    """Bounds for sampled launches.

    ``kind`` is ``forehand``, ``full_table`` or ``ball_range``. For
    ``ball_range`` the landing x is drawn from [-b, -a] U [a, b] with equal
    mass per side, where (a, b) = ``ball_range``.
    """

    kind: str = "forehand"
    x1: tuple[float, float] | None = None
    ball_range: tuple[float, float] | None = None
    x0: tuple[float, float] = (-0.5, 0.5)
    y0: tuple[float, float] = (1.3, 1.8)
    z0: tuple[float, float] = (0.15, 0.45)
    vz: tuple[float, float] = (0.0, 2.0)
    y1: tuple[float, float] = (-1.1, -0.4)
    vy_band: tuple[float, float] = VY_BAND
    max_draws: int = 10_000

    def __post_init__(self) -> None:
        if self.kind not in ("forehand", "full_table", "ball_range"):
            raise ThrowConfigError(f"unknown distribution kind {self.kind!r}")
        if self.kind == "ball_range":
            if self.ball_range is None:
                raise ThrowConfigError("ball_range distribution needs ball_range=(a, b)")
            a, b = self.ball_range
            if not 0 <= a < b:
                raise ThrowConfigError(f"ball range requires 0 <= a < b, got {self.ball_range}")
        for name in ("x0", "y0", "z0", "vz", "y1", "vy_band"):
            lo, hi = getattr(self, name)
            if lo > hi:
                raise ThrowConfigError(f"{name} bounds are reversed: {(lo, hi)}")
        if self.x1 is not None and self.x1[0] > self.x1[1]:
            raise ThrowConfigError(f"x1 bounds are reversed: {self.x1}")

    @property
    def landing_x_bounds(self) -> tuple[float, float]:
        if self.x1 is not None:
            return self.x1
        if self.kind == "forehand":
            return FOREHAND_X1
        if self.kind == "full_table":
            return FULL_TABLE_X1
        a, b = self.ball_range
        return (-b, b)

    def sample_landing_x(self, rng: np.random.Generator) -> float:
        if self.kind == "ball_range" and self.x1 is None:
            a, b = self.ball_range
            magnitude = rng.uniform(a, b)
            return float(magnitude if rng.random() < 0.5 else -magnitude)
        lo, hi = self.landing_x_bounds
        return float(rng.uniform(lo, hi))


def forehand(**overrides) -> BallDistribution:
    return BallDistribution(kind="forehand", **overrides)


def full_table(**overrides) -> BallDistribution:
    return BallDistribution(kind="full_table", **overrides)


def ball_range(a: float, b: float, **overrides) -> BallDistribution:
    return BallDistribution(kind="ball_range", ball_range=(a, b), **overrides)


def sample_throw(dist: BallDistribution, rng: np.random.Generator, g: float = 9.81, table_height: float = 0.0) -> ThrowSpec:
    """Draw launches until the solved vy falls inside the accepted band."""
    vy_lo, vy_hi = dist.vy_band
    for _ in range(dist.max_draws):
        start = np.array([rng.uniform(*dist.x0), rng.uniform(*dist.y0), rng.uniform(*dist.z0)])
        x1 = dist.sample_landing_x(rng)
        y1 = float(rng.uniform(*dist.y1))
        vz = float(rng.uniform(*dist.vz))
        try:
            velocity = solve_throw(start, (x1, y1), vz, g, table_height)
        except UnsolvableThrowError:
            continue
        if vy_lo <= velocity[1] <= vy_hi:
            return ThrowSpec(start=start, target=(x1, y1), velocity=velocity)
    raise ThrowConfigError(
        f"no throw inside vy band {dist.vy_band} after {dist.max_draws} draws; check the sampling bounds"
    )
