"""Kinematic model of the gantry-mounted 6-axis arm holding a paddle.

The chain is a list of joints, each preceded by a fixed translation expressed
in the parent frame. Joint 0 and 1 are linear axes (x, y); joints 2-7 are the
revolute arm joints J1-J6. All functions accept a leading batch axis.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

DOF = 8
PRISMATIC = "prismatic"
REVOLUTE = "revolute"

# Index of the arm joints in the 8-vector (J1 is the base rotation).
J1, J2, J3, J4, J5, J6 = 2, 3, 4, 5, 6, 7


def _deg(*values: float) -> tuple[float, ...]:
    return tuple(float(np.deg2rad(v)) for v in values)


@dataclass(frozen=True)
class RobotModel:
    """Rigid-transform chain with per-joint limits.

    Defaults approximate an ABB IRB120 (link lengths 290/270/70/302/72 mm)
    carried by an x/y gantry that sits behind the robot end of the table.
    """

    joint_types: tuple[str, ...] = (PRISMATIC, PRISMATIC) + (REVOLUTE,) * 6
    # Translation from the previous joint frame to this joint, parent frame.
    joint_offsets: tuple[tuple[float, float, float], ...] = (
        (0.0, -2.2, -0.25),
        (0.0, 0.0, 0.0),
        (0.0, 0.0, 0.0),
        (0.0, 0.0, 0.29),
        (0.0, 0.0, 0.27),
        (0.0, 0.0, 0.07),
        (0.0, 0.302, 0.0),
        (0.0, 0.072, 0.0),
    )
    joint_axes: tuple[tuple[float, float, float], ...] = (
        (1.0, 0.0, 0.0),
        (0.0, 1.0, 0.0),
        (0.0, 0.0, 1.0),
        (-1.0, 0.0, 0.0),
        (-1.0, 0.0, 0.0),
        (0.0, 1.0, 0.0),
        (-1.0, 0.0, 0.0),
        (0.0, 1.0, 0.0),
    )
    lower: tuple[float, ...] = (-0.8, -0.3) + _deg(-165, -110, -110, -160, -120, -180)
    upper: tuple[float, ...] = (0.8, 0.3) + _deg(165, 110, 70, 160, 120, 180)
    velocity_limits: tuple[float, ...] = (2.0, 2.0) + _deg(250, 250, 250, 320, 320, 420)
    # Paddle centre and face normal in the flange (J6) frame: the blade sits
    # 16 cm off the flange axis and faces along it.
    paddle_offset: tuple[float, float, float] = (0.0, 0.02, 0.16)
    paddle_normal: tuple[float, float, float] = (0.0, 1.0, 0.0)
    paddle_radius: float = 0.085
    # Capsule radius for each link segment between consecutive joint origins
    # (carriage->J2, J2->J3, J3->J4, J4->J5, J5->flange, flange->paddle).
    link_radii: tuple[float, ...] = (0.09, 0.07, 0.06, 0.05, 0.04, 0.03)
    # Pairs of link segments checked for self-collision (non-adjacent only).
    self_collision_pairs: tuple[tuple[int, int], ...] = ((0, 3), (0, 4), (0, 5), (1, 4), (1, 5))

    # Named reference poses. Forehand holds the blade to the +x side with J1
    # turned right and J4 rolled positive; backhand is its mirror image.
    forehand_pose: tuple[float, ...] = (0.0, 0.0, -0.565, 0.244, -0.258, 1.571, 0.563, -0.859)
    backhand_pose: tuple[float, ...] = (0.0, 0.0, 0.565, 0.244, -0.258, -1.571, 0.563, 0.859)
    center_pose: tuple[float, ...] = (0.0, 0.0, 0.0, 0.0, 0.13, 0.0, -0.13, 0.0)

    def __post_init__(self) -> None:
        arrays = (self.joint_types, self.joint_offsets, self.joint_axes,
                  self.lower, self.upper, self.velocity_limits)
        if any(len(a) != DOF for a in arrays):
            raise ValueError(f"robot model must describe exactly {DOF} joints")
        if not all(lo < hi for lo, hi in zip(self.lower, self.upper)):
            raise ValueError("joint limits must satisfy lower < upper")
        if any(v <= 0 for v in self.velocity_limits):
            raise ValueError("velocity limits must be positive")
        if set(self.joint_types) - {PRISMATIC, REVOLUTE}:
            raise ValueError(f"unknown joint type in {self.joint_types}")
        if len(self.link_radii) != 6:
            raise ValueError("link_radii needs one radius per capsule segment (6)")
        for name in ("forehand_pose", "backhand_pose", "center_pose"):
            pose = getattr(self, name)
            if len(pose) != DOF:
                raise ValueError(f"{name} must have {DOF} entries")
            if any(not lo <= v <= hi for v, lo, hi in zip(pose, self.lower, self.upper)):
                raise ValueError(f"{name} violates joint limits")

    def pose(self, name: str) -> np.ndarray:
        """Reference pose by name: forehand, backhand or center."""
        if name not in ("forehand", "backhand", "center"):
            raise ValueError(f"unknown pose {name!r}")
        return np.asarray(getattr(self, f"{name}_pose"), dtype=float)

    @property
    def lower_array(self) -> np.ndarray:
        return np.asarray(self.lower, dtype=float)

    @property
    def upper_array(self) -> np.ndarray:
        return np.asarray(self.upper, dtype=float)

    @property
    def velocity_array(self) -> np.ndarray:
        return np.asarray(self.velocity_limits, dtype=float)

    def clamp(self, q: np.ndarray) -> np.ndarray:
        return np.clip(q, self.lower_array, self.upper_array)


@dataclass
class PaddlePose:
    """Paddle centre, unit face normal and linear velocity (world frame)."""

    center: np.ndarray
    normal: np.ndarray
    velocity: np.ndarray = field(default_factory=lambda: np.zeros(3))


def _rotation(axis: np.ndarray, angle: np.ndarray) -> np.ndarray:
    """Rodrigues rotation about a fixed unit axis for a batch of angles."""
    x, y, z = axis / np.linalg.norm(axis)
    c = np.cos(angle)
    s = np.sin(angle)
    t = 1.0 - c
    r = np.empty(angle.shape + (3, 3))
    r[..., 0, 0] = t * x * x + c
    r[..., 0, 1] = t * x * y - s * z
    r[..., 0, 2] = t * x * z + s * y
    r[..., 1, 0] = t * x * y + s * z
    r[..., 1, 1] = t * y * y + c
    r[..., 1, 2] = t * y * z - s * x
    r[..., 2, 0] = t * x * z - s * y
    r[..., 2, 1] = t * y * z + s * x
    r[..., 2, 2] = t * z * z + c
    return r


def _apply(r: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Batched rotation of a vector: r (..., 3, 3), v (..., 3) or (3,)."""
    return (r * v[..., None, :]).sum(axis=-1)


def _compose(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return (a[..., :, :, None] * b[..., None, :, :]).sum(axis=-2)


def chain_frames(model: RobotModel, q: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Return (joint origins (..., 8, 3), paddle centre (..., 3), paddle normal (..., 3))."""
    q = np.asarray(q, dtype=float)
    batch = q.shape[:-1]
    rot = np.broadcast_to(np.eye(3), batch + (3, 3))
    pos = np.zeros(batch + (3,))
    origins = np.empty(batch + (DOF, 3))
    for i in range(DOF):
        offset = np.asarray(model.joint_offsets[i], dtype=float)
        axis = np.asarray(model.joint_axes[i], dtype=float)
        pos = pos + _apply(rot, offset)
        origins[..., i, :] = pos
        if model.joint_types[i] == PRISMATIC:
            pos = pos + _apply(rot, axis) * q[..., i, None]
        else:
            rot = _compose(rot, _rotation(axis, q[..., i]))
    center = pos + _apply(rot, np.asarray(model.paddle_offset, dtype=float))
    normal = _apply(rot, np.asarray(model.paddle_normal, dtype=float))
    normal = normal / np.linalg.norm(normal, axis=-1, keepdims=True)
    return origins, center, normal


def link_segments(model: RobotModel, q: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Start and end points (..., 6, 3) of the capsule proxies used for collisions.

    The last segment runs from the flange to the paddle centre.
    """
    origins, center, _ = chain_frames(model, q)
    # Gantry joint origins coincide with J1, so capsules start at J1.
    points = np.concatenate([origins[..., J1:, :], center[..., None, :]], axis=-2)
    return points[..., :-1, :], points[..., 1:, :]


def forward_kinematics(
    model: RobotModel,
    q: np.ndarray,
    qdot: np.ndarray | None = None,
    dt: float = 0.01,
) -> PaddlePose:
    """Paddle pose for joint positions ``q``.

    Paddle velocity is the forward finite difference of the centre over one
    control step of length ``dt`` when joint velocities are supplied.
    """
    _, center, normal = chain_frames(model, q)
    if qdot is None:
        velocity = np.zeros_like(center)
    else:
        _, ahead, _ = chain_frames(model, np.asarray(q, dtype=float) + np.asarray(qdot) * dt)
        velocity = (ahead - center) / dt
    return PaddlePose(center=center, normal=normal, velocity=velocity)
