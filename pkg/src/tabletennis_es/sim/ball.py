"""Gravity-only ball flight, table bounces, paddle contact and landing prediction.

Coordinates put the origin at the table centre with the table top at z = 0;
the robot defends the y < 0 half and the opponent half is y > 0. The table
plane is the contact plane of the ball *centre* (the throw targets are given
for the centre), while paddle contact uses the ball radius.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .robot import PaddlePose


@dataclass(frozen=True)
class PhysicsConfig:
    gravity: float = 9.81
    table_length: float = 2.74
    table_width: float = 1.525
    table_height: float = 0.0
    net_height: float = 0.1525
    # Net posts overhang each side line by the net height.
    net_overhang: float = 0.1525
    floor_height: float = -0.76
    ball_radius: float = 0.02
    table_restitution: float = 0.87
    paddle_restitution: float = 0.75
    contact_margin: float = 0.0
    # Ball is declared dead when it leaves this box.
    bounds: tuple[float, float, float] = (3.0, 4.0, 5.0)

    def __post_init__(self) -> None:
        if self.gravity <= 0:
            raise ValueError("gravity must be positive")
        if not 0 <= self.table_restitution <= 1 or not 0 <= self.paddle_restitution <= 1:
            raise ValueError("restitution coefficients must lie in [0, 1]")
        if self.floor_height >= self.table_height:
            raise ValueError("floor must be below the table top")

    @property
    def half_length(self) -> float:
        return 0.5 * self.table_length

    @property
    def half_width(self) -> float:
        return 0.5 * self.table_width


@dataclass
class BallState:
    position: np.ndarray
    velocity: np.ndarray
    live: bool | np.ndarray = True

    def copy(self) -> "BallState":
        live = self.live.copy() if isinstance(self.live, np.ndarray) else self.live
        return BallState(self.position.copy(), self.velocity.copy(), live)


class UnsolvableThrowError(ValueError):
    """No positive flight time reaches the table plane."""


def on_table(x: np.ndarray, y: np.ndarray, phys: PhysicsConfig) -> np.ndarray:
    return (np.abs(x) <= phys.half_width) & (np.abs(y) <= phys.half_length)


def _descend_time(z: np.ndarray, vz: np.ndarray, level: float, g: float) -> np.ndarray:
    """Time at which z(t) = z + vz t - g t^2 / 2 crosses ``level`` downwards (NaN if never)."""
    disc = vz * vz + 2.0 * g * (z - level)
    with np.errstate(invalid="ignore"):
        t = (vz + np.sqrt(disc)) / g
    return np.where(disc >= 0.0, t, np.nan)


@dataclass
class FlightEvents:
    """Per-ball events from one integration interval."""

    bounced: np.ndarray
    bounce_point: np.ndarray
    died: np.ndarray


def advance(
    pos: np.ndarray,
    vel: np.ndarray,
    live: np.ndarray,
    dt: float,
    phys: PhysicsConfig,
) -> tuple[np.ndarray, np.ndarray, np.ndarray, FlightEvents]:
    """Advance a batch of balls (shape (B, 3)) by ``dt`` with exact ballistic flight.

    Dead balls are returned unchanged. At most one table bounce is resolved per
    call, which holds for the sub-millisecond steps the environment uses.
    """
    g = phys.gravity
    h = phys.table_height
    pos = np.array(pos, dtype=float)
    vel = np.array(vel, dtype=float)
    live = np.array(live, dtype=bool)
    n = pos.shape[0]

    new_pos = pos + vel * dt
    new_pos[:, 2] -= 0.5 * g * dt * dt
    new_vel = vel.copy()
    new_vel[:, 2] -= g * dt

    bounced = np.zeros(n, dtype=bool)
    bounce_point = np.full((n, 3), np.nan)

    crossing = live & (pos[:, 2] > h) & (new_pos[:, 2] <= h)
    if crossing.any():
        idx = np.flatnonzero(crossing)
        tau = _descend_time(pos[idx, 2], vel[idx, 2], h, g)
        tau = np.clip(np.nan_to_num(tau, nan=dt), 0.0, dt)
        hit_xy = pos[idx, :2] + vel[idx, :2] * tau[:, None]
        inside = on_table(hit_xy[:, 0], hit_xy[:, 1], phys)
        if inside.any():
            b = idx[inside]
            t0 = tau[inside]
            rest = dt - t0
            vz_out = -phys.table_restitution * (vel[b, 2] - g * t0)
            point = np.column_stack([hit_xy[inside], np.full(b.size, h)])
            bounce_point[b] = point
            bounced[b] = True
            new_pos[b, :2] = point[:, :2] + vel[b, :2] * rest[:, None]
            new_pos[b, 2] = h + vz_out * rest - 0.5 * g * rest * rest
            new_vel[b, 2] = vz_out - g * rest

    died = np.zeros(n, dtype=bool)
    # Net: the centre passes the y = 0 plane below the tape within the posts.
    crosses_net = live & (np.sign(pos[:, 1]) != np.sign(new_pos[:, 1])) & (vel[:, 1] != 0.0)
    if crosses_net.any():
        idx = np.flatnonzero(crosses_net)
        tn = -pos[idx, 1] / vel[idx, 1]
        xn = pos[idx, 0] + vel[idx, 0] * tn
        zn = pos[idx, 2] + vel[idx, 2] * tn - 0.5 * g * tn * tn
        blocked = (
            (np.abs(xn) <= phys.half_width + phys.net_overhang)
            & (zn <= h + phys.net_height)
            & (zn >= phys.floor_height)
        )
        died[idx[blocked]] = True

    bx, by, bz = phys.bounds
    out = (
        (new_pos[:, 2] <= phys.floor_height)
        | (np.abs(new_pos[:, 0]) > bx)
        | (np.abs(new_pos[:, 1]) > by)
        | (new_pos[:, 2] > bz)
        # Inside the table slab (entered through a side face).
        | (on_table(new_pos[:, 0], new_pos[:, 1], phys) & (new_pos[:, 2] < h) & ~bounced)
    )
    died |= live & out
    new_pos[~live] = pos[~live]
    new_vel[~live] = vel[~live]
    return new_pos, new_vel, live & ~died, FlightEvents(bounced & live, bounce_point, died)


def step_ball(ball: BallState, dt: float, phys: PhysicsConfig | None = None) -> BallState:
    """Advance a single ball by ``dt`` seconds."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    phys = phys or PhysicsConfig()
    pos, vel, live, _ = advance(
        np.asarray(ball.position, dtype=float)[None],
        np.asarray(ball.velocity, dtype=float)[None],
        np.array([bool(ball.live)]),
        dt,
        phys,
    )
    return BallState(pos[0], vel[0], bool(live[0]))


def solve_throw(
    start: np.ndarray,
    target: tuple[float, float],
    vz: float,
    g: float = 9.81,
    table_height: float = 0.0,
) -> np.ndarray:
    """Initial velocity so that a ball launched from ``start`` with vertical speed
    ``vz`` crosses the table plane at ``target`` = (x1, y1)."""
    x0, y0, z0 = (float(v) for v in start)
    disc = vz * vz + 2.0 * g * (z0 - table_height)
    if disc < 0:
        raise UnsolvableThrowError(f"vz={vz} from z0={z0} never reaches the table plane")
    t = (vz + math.sqrt(disc)) / g
    if t <= 0:
        raise UnsolvableThrowError(f"no positive flight time (z0={z0}, vz={vz})")
    return np.array([(target[0] - x0) / t, (target[1] - y0) / t, vz])


def predict_landing_x(ball: BallState, phys: PhysicsConfig | None = None) -> float | None:
    """x coordinate where the ball next lands on the robot half of the table.

    One bounce on the opponent half is allowed on the way. Returns ``None`` if
    the flight never lands on the robot half.
    """
    phys = phys or PhysicsConfig()
    out = predict_landing_batch(
        np.asarray(ball.position, dtype=float)[None],
        np.asarray(ball.velocity, dtype=float)[None],
        phys,
    )
    return None if np.isnan(out[0]) else float(out[0])


def predict_landing_batch(pos: np.ndarray, vel: np.ndarray, phys: PhysicsConfig) -> np.ndarray:
    """Vectorised landing prediction; NaN marks "no landing"."""
    g = phys.gravity
    h = phys.table_height
    pos = np.asarray(pos, dtype=float)
    vel = np.asarray(vel, dtype=float)
    result = np.full(pos.shape[0], np.nan)

    # Skip the root at t = 0 when the ball is sitting on the plane moving up.
    t1 = _descend_time(pos[:, 2], vel[:, 2], h, g)
    x1 = pos[:, 0] + vel[:, 0] * t1
    y1 = pos[:, 1] + vel[:, 1] * t1
    valid = np.isfinite(t1) & (t1 > 1e-12) & on_table(x1, y1, phys)
    robot_half = valid & (y1 <= 0.0)
    result[robot_half] = x1[robot_half]

    again = valid & (y1 > 0.0)
    if again.any():
        vz_out = -phys.table_restitution * (vel[again, 2] - g * t1[again])
        t2 = 2.0 * vz_out / g
        x2 = x1[again] + vel[again, 0] * t2
        y2 = y1[again] + vel[again, 1] * t2
        land = on_table(x2, y2, phys) & (y2 <= 0.0) & (t2 > 0)
        sub = result[again]
        sub[land] = x2[land]
        result[again] = sub
    return result


def paddle_intersects(ball: BallState, paddle: PaddlePose, phys: PhysicsConfig, paddle_radius: float) -> bool:
    """Sphere-disc overlap: centre within ball radius of the blade plane and over the blade."""
    rel = np.asarray(ball.position, dtype=float) - paddle.center
    n = paddle.normal
    s = float(rel @ n)
    lateral = float(np.linalg.norm(rel - s * n))
    return abs(s) <= phys.ball_radius + phys.contact_margin and lateral <= paddle_radius


def reflect_off_paddle(vel: np.ndarray, normal: np.ndarray, paddle_vel: np.ndarray, restitution: float) -> np.ndarray:
    """Reflect velocities (..., 3) off moving blades, damping the normal component."""
    rel = vel - paddle_vel
    vn = (rel * normal).sum(axis=-1, keepdims=True)
    return rel - (1.0 + restitution) * vn * normal + paddle_vel


def paddle_contact(
    ball: BallState,
    paddle: PaddlePose,
    phys: PhysicsConfig | None = None,
    paddle_radius: float = 0.085,
) -> BallState:
    """Bounce the ball off the paddle if they overlap; otherwise return it unchanged."""
    phys = phys or PhysicsConfig()
    if not paddle_intersects(ball, paddle, phys, paddle_radius):
        return ball.copy()
    vel = reflect_off_paddle(
        np.asarray(ball.velocity, dtype=float),
        np.asarray(paddle.normal, dtype=float),
        np.asarray(paddle.velocity, dtype=float),
        phys.paddle_restitution,
    )
    return BallState(np.array(ball.position, dtype=float), vel, ball.live)


def distance_to_opponent_table(points: np.ndarray, phys: PhysicsConfig) -> np.ndarray:
    """Euclidean distance from points (..., 3) to the opponent half of the table top."""
    p = np.asarray(points, dtype=float)
    dx = np.maximum(np.abs(p[..., 0]) - phys.half_width, 0.0)
    dy = np.maximum(np.maximum(-p[..., 1], p[..., 1] - phys.half_length), 0.0)
    dz = p[..., 2] - phys.table_height
    return np.sqrt(dx * dx + dy * dy + dz * dz)
