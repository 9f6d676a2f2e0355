"""Staged curriculum over ball distributions and reward configurations."""

from __future__ import annotations

from dataclasses import dataclass

from ..sim.throws import BallDistribution
from .terms import RewardConfig

RULES = ("never", "at_iteration", "min_success")


@dataclass(frozen=True)
class AdvanceRule:
    """When to leave a stage: at a fixed global iteration, or once probe success reaches a level."""

    kind: str = "never"
    value: float = 0.0

    def __post_init__(self) -> None:
        if self.kind not in RULES:
            raise ValueError(f"advance rule must be one of {RULES}, got {self.kind!r}")

    def fires(self, iteration: int, success: float | None) -> bool:
        if self.kind == "at_iteration":
            return iteration >= self.value
        if self.kind == "min_success":
            return success is not None and success >= self.value
        return False


@dataclass(frozen=True)
class CurriculumStage:
    stage_id: int
    distribution: BallDistribution
    reward: RewardConfig
    advance: AdvanceRule = AdvanceRule()
    phase: int = 1
    name: str = ""


@dataclass(frozen=True)
class CurriculumState:
    index: int = 0
    entered_at: int = 0


def advance_curriculum(
    stages: list[CurriculumStage],
    state: CurriculumState,
    iteration: int,
    success: float | None = None,
) -> CurriculumState:
    """Move to the next stage if the current rule fires; never moves backwards.

    ``iteration`` is the number of completed updates; ``success`` the latest
    probe success rate in [0, 1].
    """
    if not stages:
        raise ValueError("curriculum needs at least one stage")
    idx = state.index
    if idx >= len(stages) - 1:
        return state
    if stages[idx].advance.fires(iteration, success):
        return CurriculumState(idx + 1, iteration)
    return state


def dry_run(stages: list[CurriculumStage], iterations: int, success: float | None = None) -> list[int]:
    """Stage index in effect at each iteration 0..iterations-1 under a constant probe success."""
    state = CurriculumState()
    out = []
    for it in range(iterations):
        out.append(state.index)
        state = advance_curriculum(stages, state, it + 1, success)
    return out
