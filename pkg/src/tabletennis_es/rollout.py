"""Run batches of episodes with a controller and collect episode records."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Protocol

import numpy as np

from .policy.action_filter import FilterState, filter_action
from .policy.arch import ArchSpec
from .policy.networks import forward
from .policy.normalization import RunningStats
from .rewards.record import EpisodeRecord, record_from_state
from .sim.env import EnvConfig, EnvState, observe, reset, step_env
from .sim.throws import ThrowSpec


class Controller(Protocol):
    def reset(self, state: EnvState) -> None: ...

    def __call__(self, obs: np.ndarray, state: EnvState) -> np.ndarray: ...


class ZeroController:
    """Holds the arm still."""

    def reset(self, state: EnvState) -> None:
        pass

    def __call__(self, obs: np.ndarray, state: EnvState) -> np.ndarray:
        return np.zeros((obs.shape[0], state.q.shape[1]))


class PolicyController:
    """Network policy with frozen normalization statistics.

    ``theta`` is either one vector for every episode or one row per episode.
    """

    def __init__(self, arch: ArchSpec, theta: np.ndarray, stats: RunningStats | None, velocity_limits: np.ndarray):
        self.arch = arch
        self.theta = np.asarray(theta, dtype=float)
        self.stats = stats
        self.velocity_limits = np.asarray(velocity_limits, dtype=float)
        self.filter: FilterState | None = None

    def reset(self, state: EnvState) -> None:
        if self.arch.action_filter_hz is not None:
            rate = 1.0 / state.config.control_dt
            self.filter = FilterState.create(self.arch.action_filter_hz, (state.batch_size, state.q.shape[1]), rate)

    def __call__(self, obs: np.ndarray, state: EnvState) -> np.ndarray:
        action = forward(obs, self.theta, self.arch, self.stats, self.velocity_limits)
        if self.filter is not None:
            action = filter_action(self.filter, action)
        return action


@dataclass
class RolloutResult:
    records: list[EpisodeRecord]
    state: EnvState
    # Per-episode observation rows gathered for the normalization statistics.
    samples: list[np.ndarray] = field(default_factory=list)


def run_episodes(
    cfg: EnvConfig,
    seeds,
    controller: Controller,
    init_pose: str | None = None,
    throws: list[ThrowSpec] | None = None,
    sample_every: int = 10,
) -> RolloutResult:
    """Play one episode per seed to termination.

    Every ``sample_every`` steps the newest observation row of each running
    episode is kept for the running statistics (0 disables sampling).
    """
    state = reset(cfg, seeds, init_pose=init_pose, throws=throws)
    controller.reset(state)
    n = state.batch_size
    samples: list[list[np.ndarray]] = [[] for _ in range(n)]
    while not state.done.all():
        obs = observe(state)
        if sample_every and state.t % sample_every == 0:
            for b in np.flatnonzero(~state.done):
                samples[b].append(obs[b, -1].copy())
        actions = controller(obs, state)
        step_env(state, actions)
    rows = [np.array(s).reshape(-1, obs.shape[-1]) for s in samples]
    return RolloutResult([record_from_state(state, b) for b in range(n)], state, rows)
