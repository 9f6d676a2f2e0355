"""Regenerate the bundled random-policy checkpoint (theta ~ N(0, 1), empty statistics)."""

from __future__ import annotations

import argparse
from pathlib import Path

import numpy as np

from tabletennis_es.policy import ArchSpec, Checkpoint, RunningStats, save_checkpoint

DEFAULT_OUT = Path(__file__).resolve().parents[1] / "src" / "tabletennis_es" / "data" / "random_policy.json"


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--seed", type=int, default=2024)
    parser.add_argument("--out", type=Path, default=DEFAULT_OUT)
    args = parser.parse_args()
    arch = ArchSpec()
    theta = np.random.default_rng(args.seed).standard_normal(arch.num_params)
    ckpt = Checkpoint(arch, theta, RunningStats(arch.features), extra={"generator": "standard_normal", "seed": args.seed})
    print(save_checkpoint(ckpt, args.out))


if __name__ == "__main__":
    main()
