"""Evaluation reports, smoothness metrics and reference controllers."""

from .hierarchical import HierarchicalController, estimate_ball_state
from .metrics import smoothness_metrics
from .report import EvalReport, build_report, evaluate_controller, evaluate_policy
from .scripted import ScriptedController, solve_position_ik

__all__ = [
    "HierarchicalController", "estimate_ball_state", "smoothness_metrics",
    "EvalReport", "build_report", "evaluate_controller", "evaluate_policy",
    "ScriptedController", "solve_position_ik",
]
