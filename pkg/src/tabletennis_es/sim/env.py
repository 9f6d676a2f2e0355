"""Batched 100 Hz table-tennis environment.

Every function works on a batch of independent episodes that are reset and
stepped together; a single episode is a batch of one. Each episode draws all
of its randomness (throw, initial-pose jitter, delays, observation noise) from
its own seed at reset, so an episode's trajectory does not depend on which
other episodes share its batch.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .ball import (
    BallState,
    FlightEvents,
    PhysicsConfig,
    advance,
    distance_to_opponent_table,
    reflect_off_paddle,
)
from .collision import collision_flags
from .robot import DOF, RobotModel, chain_frames
from .throws import BallDistribution, ThrowSpec, sample_throw

OBS_FEATURES = DOF + 3

# Termination reasons recorded per episode.
RUNNING, BALL_DEAD, RESOLVED, STEP_CAP, PASSED_ROBOT = 0, 1, 2, 3, 4


class EpisodeTerminatedError(RuntimeError):
    """step_env was called on a batch whose episodes have all ended."""


@dataclass(frozen=True)
class NoiseDelayModel:
    ball_noise: float = 0.005
    max_ball_delay: int = 4
    max_robot_delay: int = 4
    max_action_delay: int = 4

    def __post_init__(self) -> None:
        if self.ball_noise < 0:
            raise ValueError("ball_noise must be non-negative")
        if min(self.max_ball_delay, self.max_robot_delay, self.max_action_delay) < 0:
            raise ValueError("delays must be non-negative")

    @classmethod
    def off(cls) -> "NoiseDelayModel":
        return cls(0.0, 0, 0, 0)


@dataclass(frozen=True)
class EnvConfig:
    physics: PhysicsConfig = field(default_factory=PhysicsConfig)
    robot: RobotModel = field(default_factory=RobotModel)
    distribution: BallDistribution = field(default_factory=BallDistribution)
    noise: NoiseDelayModel = field(default_factory=NoiseDelayModel)
    # "auto" picks the forehand pose for forehand distributions, else center.
    init_pose: str = "auto"
    init_perturbation: float = 0.02
    control_dt: float = 0.01
    physics_substeps: int = 10
    max_steps: int = 300
    back_plane_y: float = -3.0
    history: int = 8

    def __post_init__(self) -> None:
        if self.init_pose not in ("auto", "forehand", "center", "backhand"):
            raise ValueError(f"unknown init_pose {self.init_pose!r}")
        if self.control_dt <= 0 or self.physics_substeps < 1:
            raise ValueError("control_dt must be positive and physics_substeps >= 1")
        if self.control_dt / self.physics_substeps > 1e-3 + 1e-12:
            raise ValueError("physics sub-step must not exceed 1 ms")
        if self.max_steps < 1 or self.history < 1:
            raise ValueError("max_steps and history must be positive")

    @property
    def resolved_init_pose(self) -> str:
        if self.init_pose != "auto":
            return self.init_pose
        return "forehand" if self.distribution.kind == "forehand" else "center"

    @property
    def buffer_length(self) -> int:
        return self.history + max(self.noise.max_ball_delay, self.noise.max_robot_delay)


@dataclass
class EnvState:
    """State of a batch of B episodes. Array fields carry a leading batch axis."""

    config: EnvConfig
    t: int
    q: np.ndarray
    ball_pos: np.ndarray
    ball_vel: np.ndarray
    ball_live: np.ndarray
    done: np.ndarray
    reason: np.ndarray
    paddle_center: np.ndarray
    paddle_normal: np.ndarray
    # Observation history, newest entry last.
    hist_q: np.ndarray
    hist_ball: np.ndarray
    ball_delay: np.ndarray
    robot_delay: np.ndarray
    action_delay: np.ndarray
    action_queue: np.ndarray
    noise: np.ndarray
    throws: list[ThrowSpec]
    # Episode event log.
    hit: np.ndarray
    success: np.ndarray
    self_collision: np.ndarray
    table_collision: np.ndarray
    contact_step: np.ndarray
    landing_point: np.ndarray
    min_table_distance: np.ndarray
    min_paddle_distance: np.ndarray
    # Trajectories on the control grid; entry k is the state after k steps.
    q_traj: np.ndarray
    ball_traj: np.ndarray
    paddle_traj: np.ndarray
    length: np.ndarray

    @property
    def batch_size(self) -> int:
        return self.q.shape[0]

    def ball(self, b: int = 0) -> BallState:
        return BallState(self.ball_pos[b].copy(), self.ball_vel[b].copy(), bool(self.ball_live[b]))

    def event_log(self, b: int = 0) -> dict:
        """Plain-data summary of one episode, suitable for line-delimited export."""
        landing = self.landing_point[b]
        return {
            "steps": int(self.length[b]),
            "hit": bool(self.hit[b]),
            "success": bool(self.success[b]),
            "self_collision": bool(self.self_collision[b]),
            "table_collision": bool(self.table_collision[b]),
            "contact_step": int(self.contact_step[b]),
            "landing_point": None if np.isnan(landing[0]) else [float(v) for v in landing],
            "min_table_distance": float(self.min_table_distance[b]),
            "termination": int(self.reason[b]),
            "throw_target": [float(v) for v in self.throws[b].target],
        }


@dataclass
class StepEvents:
    new_hit: np.ndarray
    hit: np.ndarray
    success: np.ndarray
    done: np.ndarray


def _initial_pose(cfg: EnvConfig, init_pose: str | None) -> np.ndarray:
    return cfg.robot.pose(init_pose or cfg.resolved_init_pose)


def reset(
    cfg: EnvConfig,
    seeds: list[int] | np.ndarray | list[np.random.SeedSequence],
    init_pose: str | None = None,
    throws: list[ThrowSpec] | None = None,
) -> EnvState:
    """Start one episode per seed.

    ``throws`` optionally pins the launch of each episode (the other random
    draws still come from the seed).
    """
    n = len(seeds)
    robot = cfg.robot
    nd = cfg.noise
    steps = cfg.max_steps
    H = cfg.buffer_length
    base = _initial_pose(cfg, init_pose)
    lo, hi = robot.lower_array, robot.upper_array

    q = np.empty((n, DOF))
    ball_pos = np.empty((n, 3))
    ball_vel = np.empty((n, 3))
    delays = np.empty((n, 3), dtype=int)
    noise = np.empty((n, steps + H, 3))
    thrown: list[ThrowSpec] = []
    for b, seed in enumerate(seeds):
        rng = np.random.default_rng(seed)
        spec = throws[b] if throws is not None else sample_throw(
            cfg.distribution, rng, cfg.physics.gravity, cfg.physics.table_height
        )
        thrown.append(spec)
        ball_pos[b] = spec.start
        ball_vel[b] = spec.velocity
        jitter = rng.uniform(-1.0, 1.0, DOF) * cfg.init_perturbation
        q[b] = np.clip(base + jitter, lo, hi)
        delays[b] = (
            rng.integers(0, nd.max_ball_delay + 1),
            rng.integers(0, nd.max_robot_delay + 1),
            rng.integers(0, nd.max_action_delay + 1),
        )
        noise[b] = rng.uniform(-1.0, 1.0, (steps + H, 3)) * nd.ball_noise

    _, center, normal = chain_frames(robot, q)
    hist_q = np.repeat(q[:, None, :], H, axis=1)
    hist_ball = ball_pos[:, None, :] + noise[:, :H, :]

    q_traj = np.zeros((n, steps + 1, DOF))
    ball_traj = np.zeros((n, steps + 1, 3))
    paddle_traj = np.zeros((n, steps + 1, 3))
    q_traj[:, 0] = q
    ball_traj[:, 0] = ball_pos
    paddle_traj[:, 0] = center

    return EnvState(
        config=cfg,
        t=0,
        q=q,
        ball_pos=ball_pos,
        ball_vel=ball_vel,
        ball_live=np.ones(n, dtype=bool),
        done=np.zeros(n, dtype=bool),
        reason=np.full(n, RUNNING),
        paddle_center=center,
        paddle_normal=normal,
        hist_q=hist_q,
        hist_ball=hist_ball,
        ball_delay=delays[:, 0],
        robot_delay=delays[:, 1],
        action_delay=delays[:, 2],
        action_queue=np.zeros((n, nd.max_action_delay + 1, DOF)),
        noise=noise,
        throws=thrown,
        hit=np.zeros(n, dtype=bool),
        success=np.zeros(n, dtype=bool),
        self_collision=np.zeros(n, dtype=bool),
        table_collision=np.zeros(n, dtype=bool),
        contact_step=np.full(n, -1),
        landing_point=np.full((n, 3), np.nan),
        min_table_distance=np.full(n, np.inf),
        min_paddle_distance=np.full(n, np.inf),
        q_traj=q_traj,
        ball_traj=ball_traj,
        paddle_traj=paddle_traj,
        length=np.zeros(n, dtype=int),
    )


def observe(state: EnvState) -> np.ndarray:
    """Observation tensor (B, T, 11): rows oldest first, joints then ball xyz."""
    T = state.config.history
    H = state.hist_q.shape[1]
    rows = np.arange(T)[None, :] - T  # -T .. -1, oldest first
    q_idx = H + rows - state.robot_delay[:, None]
    b_idx = H + rows - state.ball_delay[:, None]
    batch = np.arange(state.batch_size)[:, None]
    return np.concatenate([state.hist_q[batch, q_idx], state.hist_ball[batch, b_idx]], axis=-1)


def _paddle_signed(pos, center, normal):
    rel = pos - center
    s = (rel * normal).sum(axis=-1)
    return s, rel


def _resolve_contacts(
    p0: np.ndarray,
    v0: np.ndarray,
    c0: np.ndarray,
    c1: np.ndarray,
    n0: np.ndarray,
    n1: np.ndarray,
    u: np.ndarray,
    h: float,
    phys: PhysicsConfig,
    paddle_radius: float,
    iterations: int = 14,
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Bisection for the first instant the ball touches the moving blade in [0, h].

    Returns (contact mask, contact time, position at contact, velocity at contact).
    """
    g = phys.gravity
    r = phys.ball_radius + phys.contact_margin

    def at(tau):
        frac = (tau / h)[:, None]
        pos = p0 + v0 * tau[:, None]
        pos[:, 2] -= 0.5 * g * tau * tau
        center = c0 + (c1 - c0) * frac
        normal = n0 + (n1 - n0) * frac
        normal /= np.linalg.norm(normal, axis=-1, keepdims=True)
        return pos, center, normal

    s0, _ = _paddle_signed(p0, c0, n0)
    side = np.where(s0 >= 0.0, 1.0, -1.0)
    lo = np.zeros(p0.shape[0])
    hi = np.full(p0.shape[0], h)
    inside_at_start = np.abs(s0) <= r
    for _ in range(iterations):
        mid = 0.5 * (lo + hi)
        pos, center, normal = at(mid)
        s, _ = _paddle_signed(pos, center, normal)
        touching = side * s <= r
        hi = np.where(touching, mid, hi)
        lo = np.where(touching, lo, mid)
    tau = np.where(inside_at_start, 0.0, hi)
    pos, center, normal = at(tau)
    s, rel = _paddle_signed(pos, center, normal)
    lateral = np.linalg.norm(rel - s[:, None] * normal, axis=-1)
    vel = v0.copy()
    vel[:, 2] -= g * tau
    approaching = side * ((vel - u) * normal).sum(axis=-1) < 0.0
    contact = (side * s <= r + 1e-9) & (lateral <= paddle_radius) & approaching
    return contact, tau, pos, reflect_off_paddle(vel, normal, u, phys.paddle_restitution)


def step_env(state: EnvState, actions: np.ndarray) -> tuple[EnvState, StepEvents]:
    """Apply joint-velocity commands (B, 8) for one control step; updates ``state`` in place.

    Rows of episodes that have already ended are ignored.
    """
    alive_mask = ~state.done
    if not alive_mask.any():
        raise EpisodeTerminatedError("all episodes in this batch have terminated; call reset")
    cfg = state.config
    robot = cfg.robot
    phys = cfg.physics
    dt = cfg.control_dt
    S = cfg.physics_substeps
    h = dt / S
    t = state.t
    idx = np.flatnonzero(alive_mask)
    actions = np.asarray(actions, dtype=float)

    # Action delay: slot t holds the command issued at step t.
    L = state.action_queue.shape[1]
    state.action_queue[idx, t % L] = actions[idx]
    applied = state.action_queue[idx, (t - state.action_delay[idx]) % L]
    if t < L:
        applied[state.action_delay[idx] > t] = 0.0
    vlim = robot.velocity_array
    cmd = np.clip(applied, -vlim, vlim)
    q_old = state.q[idx]
    q_new = np.clip(q_old + cmd * dt, robot.lower_array, robot.upper_array)

    _, c_new, n_new = chain_frames(robot, q_new)
    c_old = state.paddle_center[idx]
    n_old = state.paddle_normal[idx]
    u = (c_new - c_old) / dt

    pos = state.ball_pos[idx]
    vel = state.ball_vel[idx]
    live = state.ball_live[idx].copy()
    hit = state.hit[idx].copy()
    new_hit = np.zeros(idx.size, dtype=bool)
    success = state.success[idx].copy()
    resolved = np.zeros(idx.size, dtype=bool)
    contact_step = state.contact_step[idx]
    landing = state.landing_point[idx]
    min_table = state.min_table_distance[idx]
    min_paddle = state.min_paddle_distance[idx]
    paddle_r = robot.paddle_radius
    r_ball = phys.ball_radius + phys.contact_margin

    for k in range(S):
        f0, f1 = k / S, (k + 1) / S
        ca = c_old + (c_new - c_old) * f0
        cb = c_old + (c_new - c_old) * f1
        na = n_old + (n_new - n_old) * f0
        nb = n_old + (n_new - n_old) * f1
        na /= np.linalg.norm(na, axis=-1, keepdims=True)
        nb /= np.linalg.norm(nb, axis=-1, keepdims=True)

        active = live & ~resolved
        p1, v1, live1, ev = advance(pos, vel, active, h, phys)

        # Paddle contact is only possible before the first hit.
        cand = active & ~hit
        if cand.any():
            s_a, _ = _paddle_signed(pos, ca, na)
            s_b, _ = _paddle_signed(p1, cb, nb)
            crossing = cand & ((np.abs(s_b) <= r_ball) | (np.sign(s_a) != np.sign(s_b)))
            crossing &= np.linalg.norm(p1 - cb, axis=-1) <= paddle_r + r_ball + 0.2
            if crossing.any():
                j = np.flatnonzero(crossing)
                contact, tau, pc, vc = _resolve_contacts(
                    pos[j], vel[j], ca[j], cb[j], na[j], nb[j], u[j], h, phys, paddle_r
                )
                if contact.any():
                    jc = j[contact]
                    rest = h - tau[contact]
                    pr, vr, lr, evr = _advance_each(pc[contact], vc[contact], rest, phys)
                    p1[jc], v1[jc], live1[jc] = pr, vr, lr
                    ev.bounced[jc] = evr.bounced
                    ev.bounce_point[jc] = evr.bounce_point
                    hit[jc] = True
                    new_hit[jc] = True
                    contact_step[jc] = t

        unhit = active & ~hit
        if unhit.any():
            d = np.linalg.norm(p1[unhit] - cb[unhit], axis=-1)
            min_paddle[unhit] = np.minimum(min_paddle[unhit], d)

        post = active & hit
        if post.any():
            d = distance_to_opponent_table(p1[post], phys)
            min_table[post] = np.minimum(min_table[post], d)
            landed = post & ev.bounced
            if landed.any():
                bp = ev.bounce_point[landed]
                landing[landed] = bp
                success[landed] = bp[:, 1] > 0.0
                resolved[landed] = True
                min_table[landed] = np.minimum(min_table[landed], distance_to_opponent_table(bp, phys))

        pos, vel, live = p1, v1, live1

    selfc, tablec = collision_flags(robot, q_new, phys)

    step = t + 1
    reason = state.reason[idx]
    done = np.zeros(idx.size, dtype=bool)
    for mask, why in (
        (resolved, RESOLVED),
        (~live, BALL_DEAD),
        (live & (pos[:, 1] < cfg.back_plane_y), PASSED_ROBOT),
        (np.full(idx.size, step >= cfg.max_steps), STEP_CAP),
    ):
        fresh = mask & ~done
        reason[fresh] = why
        done |= fresh

    # Observation history: shift left and append the newest sample.
    H = state.hist_q.shape[1]
    hq = state.hist_q[idx]
    hb = state.hist_ball[idx]
    hq[:, :-1] = hq[:, 1:]
    hb[:, :-1] = hb[:, 1:]
    hq[:, -1] = q_new
    hb[:, -1] = pos + state.noise[idx, H + t]
    state.hist_q[idx] = hq
    state.hist_ball[idx] = hb

    state.q[idx] = q_new
    state.ball_pos[idx] = pos
    state.ball_vel[idx] = vel
    state.ball_live[idx] = live
    state.paddle_center[idx] = c_new
    state.paddle_normal[idx] = n_new
    state.hit[idx] = hit
    state.success[idx] = success
    state.contact_step[idx] = contact_step
    state.landing_point[idx] = landing
    state.min_table_distance[idx] = min_table
    state.min_paddle_distance[idx] = min_paddle
    state.self_collision[idx] |= selfc
    state.table_collision[idx] |= tablec
    state.q_traj[idx, step] = q_new
    state.ball_traj[idx, step] = pos
    state.paddle_traj[idx, step] = c_new
    state.length[idx] = step
    state.reason[idx] = reason
    state.done[idx] = done
    state.t = step

    full = lambda a, fill: _scatter(state.batch_size, idx, a, fill)  # noqa: E731
    return state, StepEvents(
        new_hit=full(new_hit, False),
        hit=state.hit.copy(),
        success=state.success.copy(),
        done=state.done.copy(),
    )


def _scatter(n, idx, values, fill):
    out = np.full(n, fill, dtype=np.asarray(values).dtype)
    out[idx] = values
    return out


def _advance_each(pos, vel, rest, phys):
    """Advance balls by individual durations (rare path after paddle contacts)."""
    n = len(rest)
    p, v = pos.copy(), vel.copy()
    live = np.ones(n, dtype=bool)
    bounced = np.zeros(n, dtype=bool)
    bp = np.full((n, 3), np.nan)
    for i in range(n):
        if rest[i] <= 0.0:
            continue
        pi, vi, li, ev = advance(pos[i:i + 1], vel[i:i + 1], live[i:i + 1], float(rest[i]), phys)
        p[i], v[i], live[i] = pi[0], vi[0], li[0]
        bounced[i], bp[i] = ev.bounced[0], ev.bounce_point[0]
    return p, v, live, FlightEvents(bounced, bp, ~live)
