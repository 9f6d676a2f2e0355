"""Capsule proxies for arm-table and arm-arm collision flags."""

from __future__ import annotations

import numpy as np

from .ball import PhysicsConfig
from .robot import RobotModel, link_segments

_SAMPLES = np.linspace(0.0, 1.0, 5)


def _point_segment_distance(p: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    ab = b - a
    denom = np.maximum((ab * ab).sum(axis=-1), 1e-12)
    t = np.clip(((p - a) * ab).sum(axis=-1) / denom, 0.0, 1.0)
    closest = a + t[..., None] * ab
    return np.linalg.norm(p - closest, axis=-1)


def collision_flags(model: RobotModel, q: np.ndarray, phys: PhysicsConfig) -> tuple[np.ndarray, np.ndarray]:
    """Return (self_collision, table_collision) boolean arrays for joints ``q`` (B, 8)."""
    start, end = link_segments(model, q)
    radii = np.asarray(model.link_radii)
    # (B, segments, samples, 3)
    points = start[:, :, None, :] + _SAMPLES[None, None, :, None] * (end - start)[:, :, None, :]

    center = np.array([0.0, 0.0, 0.5 * (phys.table_height + phys.floor_height)])
    half = np.array([phys.half_width, phys.half_length, 0.5 * (phys.table_height - phys.floor_height)])
    excess = np.maximum(np.abs(points - center) - half, 0.0)
    box_dist = np.linalg.norm(excess, axis=-1)
    table = (box_dist < radii[None, :, None]).any(axis=(1, 2))

    selfc = np.zeros(q.shape[0], dtype=bool)
    for i, j in model.self_collision_pairs:
        d = _point_segment_distance(points[:, i], start[:, j, None, :], end[:, j, None, :])
        selfc |= (d < radii[i] + radii[j]).any(axis=-1)
    return selfc, table
