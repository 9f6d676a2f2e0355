"""Reward terms, episode records and the curriculum scheduler."""

from .curriculum import AdvanceRule, CurriculumStage, CurriculumState, advance_curriculum, dry_run
from .record import EpisodeRecord, record_from_state
from .terms import (
    RewardConfig,
    RewardStream,
    canonical,
    center_weight,
    dtr_reward,
    pose_reward_cps,
    pose_reward_cpt,
    pose_reward_dcps,
    reach_reward,
    reward_breakdown,
    sparse_only,
    sparse_rewards,
    style_penalties,
    total_reward,
)

__all__ = [
    "AdvanceRule", "CurriculumStage", "CurriculumState", "advance_curriculum", "dry_run",
    "EpisodeRecord", "record_from_state",
    "RewardConfig", "RewardStream", "canonical", "center_weight", "dtr_reward", "pose_reward_cps",
    "pose_reward_cpt", "pose_reward_dcps", "reach_reward", "reward_breakdown", "sparse_only",
    "sparse_rewards", "style_penalties", "total_reward",
]
