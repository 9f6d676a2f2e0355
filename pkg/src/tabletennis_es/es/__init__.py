"""Evolution-strategy optimizer, rollout pool and training loop."""

from .core import ESConfig, es_update, estimate_gradient, iteration_rng, optimize, sample_perturbations
from .evaluate import evaluate_candidate
from .pool import WorkerFailure, WorkerPool
from .train import METRICS_COLUMNS, TrainConfig, Trainer, latest_checkpoint, read_metrics

__all__ = [
    "ESConfig", "es_update", "estimate_gradient", "iteration_rng", "optimize", "sample_perturbations",
    "evaluate_candidate", "WorkerFailure", "WorkerPool",
    "METRICS_COLUMNS", "TrainConfig", "Trainer", "latest_checkpoint", "read_metrics",
]
