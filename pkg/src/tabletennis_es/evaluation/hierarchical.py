"""Rule-based selection between a forehand and a backhand controller."""

from __future__ import annotations

import numpy as np

from ..rollout import Controller
from ..sim.ball import PhysicsConfig, predict_landing_batch
from ..sim.env import EnvState
from ..sim.robot import DOF

# A history step counts as ball motion when the ball moved farther than this.
MOTION_THRESHOLD = 0.025
MIN_ROWS = 3


def estimate_ball_state(
    rows: np.ndarray, dt: float, g: float, threshold: float = MOTION_THRESHOLD, min_rows: int = MIN_ROWS
) -> tuple[np.ndarray, np.ndarray] | None:
    """Least-squares ballistic fit over the moving tail of a ball history (T, 3), oldest first.

    Returns (position, velocity) at the newest row, or None if fewer than
    ``min_rows`` samples belong to the flight.
    """
    steps = np.linalg.norm(np.diff(rows, axis=0), axis=1)
    still = np.flatnonzero(steps <= threshold)
    # The last stationary sample is the launch point and still lies on the flight.
    start = int(still[-1]) + 1 if still.size else 0
    flight = rows[start:]
    if flight.shape[0] < min_rows:
        return None
    tau = (np.arange(flight.shape[0]) - (flight.shape[0] - 1)) * dt
    target = flight.copy()
    target[:, 2] += 0.5 * g * tau * tau
    design = np.column_stack([np.ones_like(tau), tau])
    coef, *_ = np.linalg.lstsq(design, target, rcond=None)
    return coef[0], coef[1]


class HierarchicalController:
    """Commits each episode to one sub-controller from the predicted landing side.

    The choice is made the first time the ball history shows enough flight
    to fit; x >= 0 (and "no landing") selects the forehand controller. Until
    then the forehand controller acts.
    """

    def __init__(self, forehand: Controller, backhand: Controller, phys: PhysicsConfig | None = None) -> None:
        self.forehand = forehand
        self.backhand = backhand
        self.phys = phys or PhysicsConfig()
        self.choice: np.ndarray = np.zeros(0, dtype=int)  # -1 undecided, 0 forehand, 1 backhand
        self.predicted = np.zeros(0)

    def reset(self, state: EnvState) -> None:
        self.forehand.reset(state)
        self.backhand.reset(state)
        self.choice = np.full(state.batch_size, -1)
        self.predicted = np.full(state.batch_size, np.nan)

    def _decide(self, obs: np.ndarray, dt: float) -> None:
        for b in np.flatnonzero(self.choice < 0):
            fit = estimate_ball_state(obs[b, :, DOF:DOF + 3], dt, self.phys.gravity)
            if fit is None:
                continue
            x = predict_landing_batch(fit[0][None], fit[1][None], self.phys)[0]
            self.predicted[b] = x
            self.choice[b] = 1 if (np.isfinite(x) and x < 0.0) else 0

    def __call__(self, obs: np.ndarray, state: EnvState) -> np.ndarray:
        self._decide(obs, state.config.control_dt)
        fore = self.forehand(obs, state)
        back = self.backhand(obs, state)
        return np.where((self.choice == 1)[:, None], back, fore)
