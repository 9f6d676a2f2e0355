"""Batch evaluation and report files."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from ..es.evaluate import make_chunks
from ..es.pool import WorkerPool
from ..policy.arch import ArchSpec
from ..policy.normalization import RunningStats
from ..rewards.record import EpisodeRecord
from ..rewards.terms import RewardConfig
from ..rollout import Controller, PolicyController, run_episodes
from ..sim.env import EnvConfig
from ..sim.throws import BACKHAND, FOREHAND, side_of
from .metrics import smoothness_metrics

REPORT_COLUMNS = ("S", "H", "J", "A", "V", "JR", "S-F", "H-F", "S-B", "H-B")
ROW_COLUMNS = ("episode", "side", "landing_x", "steps", "hit", "success", "J", "A", "V", "JR")


def _rate(flags: list[bool]) -> float:
    return 100.0 * sum(flags) / len(flags) if flags else float("nan")


def _mean(values: list[float]) -> float:
    # fsum is exact, so the mean does not depend on episode order.
    return math.fsum(values) / len(values) if values else float("nan")


@dataclass
class EvalReport:
    episodes: int
    S: float
    H: float
    J: float
    A: float
    V: float
    JR: float
    S_F: float
    H_F: float
    S_B: float
    H_B: float
    n_forehand: int
    n_backhand: int
    rows: list[dict] = field(default_factory=list)

    def summary(self) -> dict:
        d = asdict(self)
        d.pop("rows")
        return d

    def table_row(self) -> dict:
        s = self.summary()
        return {c: s[c.replace("-", "_")] for c in REPORT_COLUMNS}

    def format(self) -> str:
        row = self.table_row()
        head = " ".join(f"{c:>7}" for c in row)
        vals = " ".join(f"{v:7.2f}" for v in row.values())
        return f"{self.episodes} episodes\n{head}\n{vals}"

    def write(self, out_dir: str | Path, stem: str = "eval") -> tuple[Path, Path]:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        json_path = out / f"{stem}.json"
        csv_path = out / f"{stem}.csv"
        payload = {"summary": _jsonable(self.summary()), "table": _jsonable(self.table_row()), "rows": self.rows}
        json_path.write_text(json.dumps(payload, indent=1) + "\n")
        with csv_path.open("w", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=ROW_COLUMNS)
            writer.writeheader()
            writer.writerows(self.rows)
        return json_path, csv_path

    @classmethod
    def read(cls, path: str | Path) -> "EvalReport":
        d = json.loads(Path(path).read_text())
        summary = {k: (float("nan") if v is None else v) for k, v in d["summary"].items()}
        return cls(**summary, rows=d["rows"])


def _jsonable(d: dict) -> dict:
    return {k: (None if isinstance(v, float) and math.isnan(v) else v) for k, v in d.items()}


def build_report(records: list[EpisodeRecord], reduction: str = "max") -> EvalReport:
    """Aggregate episodes; centre throws count as forehand."""
    rows = []
    for i, rec in enumerate(records):
        side = side_of(rec.landing_x)
        side = BACKHAND if side == BACKHAND else FOREHAND
        j, a, v, jr = smoothness_metrics(rec, reduction)
        rows.append({"episode": i, "side": side, "landing_x": rec.landing_x, "steps": rec.steps,
                     "hit": bool(rec.hit), "success": bool(rec.success), "J": j, "A": a, "V": v, "JR": jr})
    fore = [r for r in rows if r["side"] == FOREHAND]
    back = [r for r in rows if r["side"] == BACKHAND]
    return EvalReport(
        episodes=len(rows),
        S=_rate([r["success"] for r in rows]),
        H=_rate([r["hit"] for r in rows]),
        J=_mean([r["J"] for r in rows]),
        A=_mean([r["A"] for r in rows]),
        V=_mean([r["V"] for r in rows]),
        JR=_mean([r["JR"] for r in rows]),
        S_F=_rate([r["success"] for r in fore]),
        H_F=_rate([r["hit"] for r in fore]),
        S_B=_rate([r["success"] for r in back]),
        H_B=_rate([r["hit"] for r in back]),
        n_forehand=len(fore),
        n_backhand=len(back),
        rows=rows,
    )


def eval_seeds(seed: int, n: int) -> list:
    # The trailing tag keeps evaluation episodes apart from training streams.
    return [[seed, e, 7] for e in range(n)]


def evaluate_policy(
    theta: np.ndarray,
    arch: ArchSpec,
    env: EnvConfig,
    n: int = 2500,
    seed: int = 0,
    stats: RunningStats | None = None,
    workers: int = 1,
    chunk_size: int = 256,
    reduction: str = "max",
) -> EvalReport:
    """Run ``n`` episodes of a network policy and aggregate them."""
    rows = np.repeat(np.asarray(theta, dtype=float)[None], n, axis=0)
    tasks = make_chunks(env, RewardConfig(), arch, stats, rows, eval_seeds(seed, n), chunk_size, 0)
    with WorkerPool(workers) as pool:
        results = pool.map(_records_chunk, tasks)
    return build_report([r for chunk in results for r in chunk], reduction)


def _records_chunk(task) -> list[EpisodeRecord]:
    ctrl = PolicyController(task.arch, task.thetas, task.stats, task.env.robot.velocity_array)
    return run_episodes(task.env, task.seeds, ctrl, sample_every=0).records


def evaluate_controller(
    controller: Controller,
    env: EnvConfig,
    n: int = 100,
    seed: int = 0,
    chunk_size: int = 256,
    reduction: str = "max",
) -> EvalReport:
    """Evaluate an arbitrary in-process controller (serially)."""
    seeds = eval_seeds(seed, n)
    records: list[EpisodeRecord] = []
    for i in range(0, n, chunk_size):
        records.extend(run_episodes(env, seeds[i:i + chunk_size], controller, sample_every=0).records)
    return build_report(records, reduction)

