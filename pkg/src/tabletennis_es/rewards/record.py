"""Per-episode record consumed by rewards and evaluation."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class EpisodeRecord:
    """Trajectories on the control grid plus episode events.

    ``q`` holds L + 1 joint samples (initial state then one per step);
    ``paddle`` and ``ball`` follow the same grid. ``contact_step`` is the
    control step during which the paddle touched the ball, or -1.
    """

    q: np.ndarray
    paddle: np.ndarray
    ball: np.ndarray
    dt: float = 0.01
    hit: bool = False
    success: bool = False
    self_collision: bool = False
    table_collision: bool = False
    landing_x: float = 0.0
    contact_step: int = -1
    # Closest approach of the returned ball to the opponent half (inf without a hit).
    min_table_distance: float = float("inf")
    # Closest paddle-ball approach before any hit.
    min_paddle_distance: float = float("inf")

    @property
    def steps(self) -> int:
        return self.q.shape[0] - 1

    @property
    def velocity(self) -> np.ndarray:
        return np.diff(self.q, axis=0) / self.dt

    @property
    def acceleration(self) -> np.ndarray:
        return np.diff(self.velocity, axis=0) / self.dt

    @property
    def jerk(self) -> np.ndarray:
        return np.diff(self.acceleration, axis=0) / self.dt

    @property
    def collided(self) -> bool:
        return bool(self.self_collision or self.table_collision)

    @property
    def pre_contact_q(self) -> np.ndarray:
        """Joint samples up to the start of the contact step (whole episode without contact)."""
        if self.contact_step < 0:
            return self.q
        return self.q[: self.contact_step + 1]


def record_from_state(state, b: int) -> EpisodeRecord:
    """Slice episode ``b`` out of a finished batched environment state."""
    n = int(state.length[b])
    return EpisodeRecord(
        q=state.q_traj[b, : n + 1].copy(),
        paddle=state.paddle_traj[b, : n + 1].copy(),
        ball=state.ball_traj[b, : n + 1].copy(),
        dt=state.config.control_dt,
        hit=bool(state.hit[b]),
        success=bool(state.success[b]),
        self_collision=bool(state.self_collision[b]),
        table_collision=bool(state.table_collision[b]),
        landing_x=float(state.throws[b].target[0]),
        contact_step=int(state.contact_step[b]),
        min_table_distance=float(state.min_table_distance[b]),
        min_paddle_distance=float(state.min_paddle_distance[b]),
    )
