"""Checkpoint files: UTF-8 JSON with every float written in shortest round-trip form.

Layout::

    {"format": "tabletennis-es-checkpoint", "version": 1,
     "arch": {...ArchSpec fields...}, "theta": [...], "stats": {...},
     "stage": int, "iteration": int, "extra": {...}}
"""

from __future__ import annotations

import json
import os
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .arch import ArchSpec
from .normalization import RunningStats

FORMAT = "tabletennis-es-checkpoint"
VERSION = 1


class CheckpointError(ValueError):
    """Unreadable or mismatched checkpoint."""


@dataclass
class Checkpoint:
    arch: ArchSpec
    theta: np.ndarray
    stats: RunningStats
    stage: int = 0
    iteration: int = 0
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "format": FORMAT,
            "version": VERSION,
            "arch": asdict(self.arch),
            "theta": [float(v) for v in self.theta],
            "stats": self.stats.to_dict(),
            "stage": int(self.stage),
            "iteration": int(self.iteration),
            "extra": self.extra,
        }


def arch_from_dict(d: dict) -> ArchSpec:
    d = dict(d)
    for key in ("channels", "dilations", "hidden"):
        if key in d:
            d[key] = tuple(int(v) for v in d[key])
    if "gated" in d:
        d["gated"] = tuple(bool(v) for v in d["gated"])
    return ArchSpec(**d)


def save_checkpoint(ckpt: Checkpoint, path: str | Path) -> Path:
    """Write atomically (temp file + rename) so an interrupt never leaves half a file."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_text(json.dumps(ckpt.to_dict(), indent=1) + "\n", encoding="utf-8")
    os.replace(tmp, path)
    return path


def load_checkpoint(path: str | Path, expect: ArchSpec | None = None) -> Checkpoint:
    try:
        d = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise CheckpointError(f"cannot read checkpoint {path}: {exc}") from exc
    if d.get("format") != FORMAT or d.get("version") != VERSION:
        raise CheckpointError(f"{path}: not a version-{VERSION} checkpoint")
    arch = arch_from_dict(d["arch"])
    theta = np.array(d["theta"], dtype=float)
    if theta.shape != (arch.num_params,):
        raise CheckpointError(f"{path}: theta has {theta.size} entries, arch needs {arch.num_params}")
    if expect is not None and expect.num_params != arch.num_params:
        raise CheckpointError(
            f"{path}: checkpoint has {arch.num_params} parameters ({arch.kind}), "
            f"configured architecture needs {expect.num_params} ({expect.kind})"
        )
    return Checkpoint(arch, theta, RunningStats.from_dict(d["stats"]), int(d["stage"]), int(d["iteration"]), d.get("extra", {}))
