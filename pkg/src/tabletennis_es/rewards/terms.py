"""Reward terms and their weighted combination.

Every term is computed as a raw value; its contribution to the total is
``weight * raw``. Penalty raws are <= 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from ..sim.robot import J1, J4, RobotModel
from .record import EpisodeRecord

_ROBOT = RobotModel()

POSE_MODES = ("none", "cps", "dcps", "cpt")
SUCCESS_MODES = ("none", "dtr", "landing_bonus")
TERMS = ("st", "ic", "bbr", "ph", "ja", "v", "a", "j", "pose", "dtr", "reach")


def _tuple(a) -> tuple[float, ...]:
    return tuple(float(v) for v in a)


@dataclass(frozen=True)
class RewardConfig:
    """Weights and thresholds of every reward term. Zero weight disables a term."""

    hit: float = 1.0
    success: float = 1.0
    ic: float = 0.0
    bbr: float = 0.0
    # |J1| beyond this many radians counts as rotating the base too far back.
    bbr_threshold: float = 0.25 * (_ROBOT.upper[J1] - _ROBOT.lower[J1])
    ph: float = 0.0
    ph_clearance: float = 0.05
    ja: float = 0.0
    ja_margin: float = 0.05
    v: float = 0.0
    a: float = 0.0
    j: float = 0.0
    # Per-joint (or scalar) limits for the velocity, acceleration and jerk
    # penalties: three times the bundled random policy's forehand V, A and J.
    v_limit: float | tuple[float, ...] = 13.2
    a_limit: float | tuple[float, ...] = 1170.0
    j_limit: float | tuple[float, ...] = 116500.0
    pose_mode: str = "none"
    pose_weight: float = 1.0
    # Joint-space distances are divided by this; None means |forehand - backhand|.
    pose_scale: float | None = None
    center_width: float = 0.2
    success_mode: str = "none"
    dtr_weight: float = 1.0
    landing_bonus: float = 1.0
    # Dense approach shaping (1 - closest paddle-ball distance); off by default.
    reach: float = 0.0
    forehand_pose: tuple[float, ...] = field(default=_ROBOT.forehand_pose)
    backhand_pose: tuple[float, ...] = field(default=_ROBOT.backhand_pose)
    joint_lower: tuple[float, ...] = field(default=_ROBOT.lower)
    joint_upper: tuple[float, ...] = field(default=_ROBOT.upper)

    def __post_init__(self) -> None:
        if self.pose_mode not in POSE_MODES:
            raise ValueError(f"pose_mode must be one of {POSE_MODES}, got {self.pose_mode!r}")
        if self.success_mode not in SUCCESS_MODES:
            raise ValueError(f"success_mode must be one of {SUCCESS_MODES}, got {self.success_mode!r}")
        for name in ("hit", "success", "ic", "bbr", "ph", "ja", "v", "a", "j", "pose_weight",
                     "dtr_weight", "landing_bonus", "reach"):
            if not np.isfinite(getattr(self, name)):
                raise ValueError(f"weight {name} must be finite")
        if self.center_width <= 0:
            raise ValueError("center_width must be positive")
        if self.pose_scale is not None and self.pose_scale <= 0:
            raise ValueError("pose_scale must be positive")

    @property
    def scale(self) -> float:
        if self.pose_scale is not None:
            return self.pose_scale
        return float(np.linalg.norm(np.subtract(self.forehand_pose, self.backhand_pose)))

    def with_robot(self, robot: RobotModel) -> "RewardConfig":
        """Copy whose reference poses and joint limits come from ``robot``."""
        return replace(self, forehand_pose=_tuple(robot.forehand_pose), backhand_pose=_tuple(robot.backhand_pose),
                       joint_lower=_tuple(robot.lower), joint_upper=_tuple(robot.upper))


def sparse_only() -> RewardConfig:
    return RewardConfig()


def canonical(**overrides) -> RewardConfig:
    """Sparse rewards plus every style penalty."""
    base = dict(ic=1.0, bbr=0.5, ph=1.0, ja=1.0, v=0.1, a=0.1, j=0.1)
    base.update(overrides)
    return RewardConfig(**base)


# -- sparse ------------------------------------------------------------------------


def sparse_rewards(rec: EpisodeRecord) -> float:
    return float(rec.hit) + float(rec.success)


# -- style penalties (raw values, <= 0) ---------------------------------------------


def _excess_rows(values: np.ndarray, limit) -> np.ndarray:
    """Per-step summed excess of |values| over ``limit`` (one entry per row)."""
    return np.maximum(np.abs(values) - np.asarray(limit, dtype=float), 0.0).sum(axis=-1)


def _neg_sum(rows) -> float:
    # Correctly rounded, so streamed and batch sums of the same rows agree exactly.
    return -math.fsum(np.atleast_1d(rows).tolist())


def _bbr_step(q: np.ndarray, cfg: RewardConfig) -> np.ndarray:
    return np.maximum(np.abs(q[..., J1]) - cfg.bbr_threshold, 0.0)


def _ja_step(q: np.ndarray, cfg: RewardConfig) -> np.ndarray:
    lo = np.asarray(cfg.joint_lower)
    hi = np.asarray(cfg.joint_upper)
    margin = cfg.ja_margin * (hi - lo)
    room = np.minimum(q - lo, hi - q)
    return np.maximum(margin - room, 0.0).sum(axis=-1)


def style_penalties(rec: EpisodeRecord, cfg: RewardConfig) -> dict[str, float]:
    """Raw IC, BBR, PH, JA, V, A, J values. Step sums run over samples 1..L."""
    q = rec.q[1:]
    return {
        "ic": -1.0 if rec.collided else 0.0,
        "bbr": _neg_sum(_bbr_step(q, cfg)),
        "ph": _neg_sum(np.maximum(cfg.ph_clearance - rec.paddle[1:, 2], 0.0)),
        "ja": _neg_sum(_ja_step(q, cfg)),
        "v": _neg_sum(_excess_rows(rec.velocity, cfg.v_limit)),
        "a": _neg_sum(_excess_rows(rec.acceleration, cfg.a_limit)) if rec.steps >= 2 else 0.0,
        "j": _neg_sum(_excess_rows(rec.jerk, cfg.j_limit)) if rec.steps >= 3 else 0.0,
    }


# -- pose rewards ------------------------------------------------------------------------


def center_weight(x: float, width: float = 0.2) -> float:
    """0 at the table centre line, rising linearly to 1 at |x| = width."""
    return float(min(max(abs(x) / width, 0.0), 1.0))


def _is_forehand(x: float) -> bool:
    return x >= 0.0


def pose_distance(rec: EpisodeRecord, ref, cfg: RewardConfig) -> float:
    q = rec.pre_contact_q
    return float(np.min(np.linalg.norm(q - np.asarray(ref), axis=-1))) / cfg.scale


def pose_reward_cps(rec: EpisodeRecord, cfg: RewardConfig, side: str | None = None) -> float:
    """1 - d for the reference pose of ``side`` (default: side of the throw)."""
    if side is None:
        side = "forehand" if _is_forehand(rec.landing_x) else "backhand"
    if side not in ("forehand", "backhand"):
        raise ValueError(f"side must be forehand or backhand, got {side!r}")
    ref = cfg.forehand_pose if side == "forehand" else cfg.backhand_pose
    return 1.0 - pose_distance(rec, ref, cfg)


def pose_reward_dcps(rec: EpisodeRecord, cfg: RewardConfig, landing_x: float | None = None) -> float:
    x = rec.landing_x if landing_x is None else landing_x
    w = center_weight(x, cfg.center_width)
    if w == 0.0:
        return 0.0
    diff = pose_reward_cps(rec, cfg, "forehand") - pose_reward_cps(rec, cfg, "backhand")
    return w * diff if _is_forehand(x) else -w * diff


def pose_reward_cpt(rec: EpisodeRecord, cfg: RewardConfig, landing_x: float | None = None) -> float:
    """Signed difference of the fractions of pre-contact steps spent in each pose half."""
    x = rec.landing_x if landing_x is None else landing_x
    w = center_weight(x, cfg.center_width)
    q = rec.pre_contact_q
    fore = np.mean((q[:, J1] < 0.0) & (q[:, J4] > 0.0))
    back = np.mean((q[:, J1] > 0.0) & (q[:, J4] < 0.0))
    diff = float(fore - back)
    return w * diff if _is_forehand(x) else -w * diff


# -- success shaping ---------------------------------------------------------------------


def dtr_reward(rec: EpisodeRecord) -> float:
    """max(1 - d, -2) with d the closest approach of the returned ball to the opponent half."""
    if not rec.hit:
        return 0.0
    return float(max(1.0 - rec.min_table_distance, -2.0))


def reach_reward(rec: EpisodeRecord) -> float:
    if rec.hit:
        return 1.0
    return float(max(1.0 - rec.min_paddle_distance, -2.0))


# -- combination ---------------------------------------------------------------------------


def _pose_raw(rec: EpisodeRecord, cfg: RewardConfig) -> float:
    if cfg.pose_mode == "cps":
        return pose_reward_cps(rec, cfg)
    if cfg.pose_mode == "dcps":
        return pose_reward_dcps(rec, cfg)
    if cfg.pose_mode == "cpt":
        return pose_reward_cpt(rec, cfg)
    return 0.0


def _episodic(rec: EpisodeRecord, cfg: RewardConfig) -> dict[str, float]:
    success = cfg.success * float(rec.success)
    if cfg.success_mode == "landing_bonus" and rec.success:
        success += cfg.landing_bonus
    out = {
        "st": cfg.hit * float(rec.hit) + success,
        "ic": cfg.ic * (-1.0 if rec.collided else 0.0),
        "pose": cfg.pose_weight * _pose_raw(rec, cfg) if cfg.pose_mode != "none" else 0.0,
        "dtr": cfg.dtr_weight * dtr_reward(rec) if cfg.success_mode == "dtr" else 0.0,
        "reach": cfg.reach * reach_reward(rec) if cfg.reach != 0.0 else 0.0,
    }
    return out


def reward_breakdown(rec: EpisodeRecord, cfg: RewardConfig) -> dict[str, float]:
    """Weighted contribution of every term (keys in ``TERMS``)."""
    raw = style_penalties(rec, cfg)
    out = _episodic(rec, cfg)
    for name in ("bbr", "ph", "ja", "v", "a", "j"):
        out[name] = getattr(cfg, name) * raw[name]
    return {k: out[k] for k in TERMS}


def total_reward(rec: EpisodeRecord, cfg: RewardConfig) -> tuple[float, dict[str, float]]:
    parts = reward_breakdown(rec, cfg)
    return float(sum(parts.values())), parts


class RewardStream:
    """Accumulates the per-step terms as joint samples arrive.

    ``push`` takes the joint vector and paddle height after each control
    step; ``finish`` adds the episodic terms from the final record.
    """

    def __init__(self, cfg: RewardConfig, q0: np.ndarray, dt: float = 0.01) -> None:
        self.cfg = cfg
        self.dt = dt
        self._q = np.asarray(q0, dtype=float)
        self._v: np.ndarray | None = None
        self._a: np.ndarray | None = None
        self.steps: dict[str, list[float]] = {k: [] for k in ("bbr", "ph", "ja", "v", "a", "j")}

    def push(self, q: np.ndarray, paddle_z: float) -> None:
        cfg = self.cfg
        q = np.asarray(q, dtype=float)
        v = (q - self._q) / self.dt
        s = self.steps
        s["bbr"].append(float(_bbr_step(q, cfg)))
        s["ph"].append(max(cfg.ph_clearance - float(paddle_z), 0.0))
        s["ja"].append(float(_ja_step(q, cfg)))
        s["v"].append(float(_excess_rows(v, cfg.v_limit)))
        if self._v is not None:
            a = (v - self._v) / self.dt
            s["a"].append(float(_excess_rows(a, cfg.a_limit)))
            if self._a is not None:
                s["j"].append(float(_excess_rows((a - self._a) / self.dt, cfg.j_limit)))
            self._a = a
        self._q, self._v = q, v

    def finish(self, rec: EpisodeRecord) -> tuple[float, dict[str, float]]:
        out = _episodic(rec, self.cfg)
        for name, rows in self.steps.items():
            out[name] = getattr(self.cfg, name) * _neg_sum(rows) if rows else 0.0
        parts = {k: out[k] for k in TERMS}
        return float(sum(parts.values())), parts
