"""Privileged scripted striker used as a reference controller.

It reads the true ball state at reset, predicts where the ball crosses a
strike plane after bouncing on the robot half, and drives the paddle
through that point with a forward swing using damped least-squares
inverse kinematics.
"""

from __future__ import annotations

import numpy as np

from ..sim.ball import PhysicsConfig, _descend_time
from ..sim.env import EnvState
from ..sim.robot import RobotModel, chain_frames

IK_JOINTS = (0, 1, 3, 4)


def solve_position_ik(
    robot: RobotModel,
    q0: np.ndarray,
    target: np.ndarray,
    joints: tuple[int, ...] = IK_JOINTS,
    iterations: int = 10,
    damping: float = 1e-4,
) -> np.ndarray:
    """Move ``joints`` of q0 (B, 8) so the paddle centre approaches ``target`` (B, 3)."""
    q = np.array(q0, dtype=float)
    eps = 1e-6
    lo, hi = robot.lower_array, robot.upper_array
    for _ in range(iterations):
        _, c, _ = chain_frames(robot, q)
        err = target - c
        jac = np.empty(q.shape[:1] + (3, len(joints)))
        for k, j in enumerate(joints):
            dq = q.copy()
            dq[:, j] += eps
            jac[:, :, k] = (chain_frames(robot, dq)[1] - c) / eps
        jt = np.swapaxes(jac, 1, 2)
        step = np.linalg.solve(jt @ jac + damping * np.eye(len(joints)), (jt @ err[..., None]))[..., 0]
        q[:, joints] += step
        q = np.clip(q, lo, hi)
    return q


class ScriptedController:
    """Intercepts each throw at ``strike_y`` with a swing of ``swing_speed`` m/s along +y.

    ``side`` limits the striker to throws landing on that side; other
    episodes are left motionless.
    """

    def __init__(
        self,
        robot: RobotModel | None = None,
        phys: PhysicsConfig | None = None,
        side: str = "both",
        strike_y: float = -1.8,
        swing_speed: float = 1.5,
        lead: float = 0.1,
        lift: float = 0.0,
    ) -> None:
        if side not in ("both", "forehand", "backhand"):
            raise ValueError(f"side must be both, forehand or backhand, got {side!r}")
        self.robot = robot or RobotModel()
        self.phys = phys or PhysicsConfig()
        self.side = side
        self.strike_y = strike_y
        self.swing_speed = swing_speed
        self.lead = lead
        self.lift = lift

    def reset(self, state: EnvState) -> None:
        phys = self.phys
        g = phys.gravity
        pos, vel = state.ball_pos.copy(), state.ball_vel.copy()
        t1 = _descend_time(pos[:, 2], vel[:, 2], phys.table_height, g)
        bounce = pos[:, :2] + vel[:, :2] * t1[:, None]
        vz_out = -phys.table_restitution * (vel[:, 2] - g * t1)
        t_rel = (self.strike_y - bounce[:, 1]) / vel[:, 1]
        self.t_strike = t1 + t_rel
        self.point = np.column_stack([
            bounce[:, 0] + vel[:, 0] * t_rel,
            np.full(len(t1), self.strike_y),
            phys.table_height + vz_out * t_rel - 0.5 * g * t_rel ** 2 + self.lift,
        ])
        fore = bounce[:, 0] >= 0.0
        self.active = np.ones(len(t1), dtype=bool)
        if self.side == "forehand":
            self.active = fore
        elif self.side == "backhand":
            self.active = ~fore
        self.base = np.where(fore[:, None], self.robot.pose("forehand"), self.robot.pose("backhand"))

    def __call__(self, obs: np.ndarray, state: EnvState) -> np.ndarray:
        dt = state.config.control_dt
        t_next = (state.t + 1) * dt
        # Hold back along -y, then sweep through the strike point.
        offset = np.clip(t_next - self.t_strike, -self.lead, None) * self.swing_speed
        target = self.point + np.column_stack([np.zeros_like(offset), offset, np.zeros_like(offset)])
        seed = self.base.copy()
        seed[:, IK_JOINTS] = state.q[:, IK_JOINTS]
        q_goal = solve_position_ik(self.robot, seed, target, iterations=4)
        action = (q_goal - state.q) / dt
        action[~self.active] = 0.0
        return action
