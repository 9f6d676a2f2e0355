"""YAML run configuration with strict, line-numbered validation.

Top-level layout (``env``, ``arch`` and ``es`` are required)::

    seed: 0
    workers: 1
    out_dir: runs/example
    env:        {distribution: {kind: forehand, ...}, noise: {...}, physics: {...}, ...}
    arch:       {kind: gated_cnn, action_filter_hz: null, ...}
    es:         {sigma: 0.02, lr: 0.01, n_pairs: 64, top_b: 32, rollouts: 2, iterations: 300}
    train:      {chunk_size: 64, probe_episodes: 32, init: zeros, ...}
    reward:     {...}          # used when there is no curriculum
    curriculum: [{name, phase, distribution, reward, advance: {kind, value}}, ...]
    eval:       {episodes: 2500, seed: 0, reduction: max}
    bench:      {episodes: 64, workers: [1, 2, 4]}
"""

from __future__ import annotations

import dataclasses
import types
import typing
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any

import yaml

from .es.core import ESConfig
from .es.train import TrainConfig
from .policy.arch import ArchSpec
from .rewards.curriculum import AdvanceRule, CurriculumStage
from .rewards.terms import RewardConfig
from .sim.ball import PhysicsConfig
from .sim.env import EnvConfig, NoiseDelayModel
from .sim.robot import RobotModel
from .sim.throws import BallDistribution


class ConfigError(ValueError):
    """Invalid configuration; the message carries file and line."""


@dataclass(frozen=True)
class TrainSection:
    chunk_size: int = 64
    probe_episodes: int = 32
    probe_every: int = 1
    checkpoint_every: int = 10
    sample_every: int = 10
    normalize_states: bool = True
    init: str = "zeros"


@dataclass(frozen=True)
class EvalSection:
    episodes: int = 2500
    seed: int = 0
    reduction: str = "max"


@dataclass(frozen=True)
class BenchSection:
    episodes: int = 64
    workers: tuple[int, ...] = (1, 2, 4)


@dataclass(frozen=True)
class StageSection:
    name: str = ""
    phase: int = 1
    distribution: BallDistribution = field(default_factory=BallDistribution)
    reward: dict = field(default_factory=dict)
    advance: AdvanceRule = field(default_factory=AdvanceRule)


@dataclass
class RunConfig:
    env: EnvConfig
    arch: ArchSpec
    es: ESConfig
    train: TrainSection = field(default_factory=TrainSection)
    reward: RewardConfig = field(default_factory=RewardConfig)
    curriculum: list[CurriculumStage] = field(default_factory=list)
    eval: EvalSection = field(default_factory=EvalSection)
    bench: BenchSection = field(default_factory=BenchSection)
    seed: int = 0
    workers: int = 1
    out_dir: str = "runs/default"
    source: str = "<memory>"

    def train_config(self, out_dir: str | None = None, workers: int | None = None, seed: int | None = None) -> TrainConfig:
        es = self.es if seed is None else replace(self.es, seed=seed)
        stages = self.curriculum or [CurriculumStage(0, self.env.distribution, self.reward)]
        t = self.train
        return TrainConfig(
            es=es, arch=self.arch, env=self.env, stages=stages,
            workers=self.workers if workers is None else workers,
            chunk_size=t.chunk_size, probe_episodes=t.probe_episodes, probe_every=t.probe_every,
            checkpoint_every=t.checkpoint_every, sample_every=t.sample_every,
            normalize_states=t.normalize_states, init=t.init,
            out_dir=self.out_dir if out_dir is None else out_dir,
        )


REQUIRED = ("env", "arch", "es")
_SCALARS = ("seed", "workers", "out_dir")


# -- line tracking ------------------------------------------------------------------


def _positions(node: yaml.Node, path: tuple = (), out: dict | None = None) -> dict:
    """Map key paths to 1-based source lines."""
    out = {} if out is None else out
    out.setdefault(path, node.start_mark.line + 1)
    if isinstance(node, yaml.MappingNode):
        for key, value in node.value:
            sub = path + (key.value,)
            out[sub] = key.start_mark.line + 1
            _positions(value, sub, out)
            out[sub] = key.start_mark.line + 1
    elif isinstance(node, yaml.SequenceNode):
        for i, item in enumerate(node.value):
            _positions(item, path + (i,), out)
    return out


class _Context:
    def __init__(self, source: str, lines: dict) -> None:
        self.source = source
        self.lines = lines

    def line(self, path: tuple) -> int:
        while path not in self.lines and path:
            path = path[:-1]
        return self.lines.get(path, 1)

    def error(self, path: tuple, message: str) -> ConfigError:
        where = ".".join(str(p) for p in path) or "<root>"
        return ConfigError(f"{self.source}:{self.line(path)}: {where}: {message}")


# -- typed conversion ------------------------------------------------------------------


def _convert(tp: Any, value: Any, path: tuple, ctx: _Context) -> Any:
    origin = typing.get_origin(tp)
    args = typing.get_args(tp)
    if tp is Any:
        return value
    if origin in (typing.Union, types.UnionType):
        if value is None and type(None) in args:
            return None
        errors = []
        for option in (a for a in args if a is not type(None)):
            try:
                return _convert(option, value, path, ctx)
            except ConfigError as exc:
                errors.append(exc)
        raise errors[-1] if errors else ctx.error(path, "value not allowed")
    if dataclasses.is_dataclass(tp):
        return _build(tp, value, path, ctx)
    if tp is bool:
        if not isinstance(value, bool):
            raise ctx.error(path, f"expected true/false, got {value!r}")
        return value
    if tp is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ctx.error(path, f"expected an integer, got {value!r}")
        return value
    if tp is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ctx.error(path, f"expected a number, got {value!r}")
        return float(value)
    if tp is str:
        if not isinstance(value, str):
            raise ctx.error(path, f"expected a string, got {value!r}")
        return value
    if tp is dict or origin is dict:
        if not isinstance(value, dict):
            raise ctx.error(path, f"expected a mapping, got {value!r}")
        return value
    if origin in (tuple, list):
        if not isinstance(value, list):
            raise ctx.error(path, f"expected a list, got {value!r}")
        if origin is tuple and len(args) == 2 and args[1] is Ellipsis:
            items = [_convert(args[0], v, path + (i,), ctx) for i, v in enumerate(value)]
        elif origin is tuple:
            if len(value) != len(args):
                raise ctx.error(path, f"expected {len(args)} entries, got {len(value)}")
            items = [_convert(a, v, path + (i,), ctx) for i, (a, v) in enumerate(zip(args, value))]
        else:
            items = [_convert(args[0] if args else Any, v, path + (i,), ctx) for i, v in enumerate(value)]
        return tuple(items) if origin is tuple else items
    raise ctx.error(path, f"unsupported field type {tp!r}")


def _build(cls: type, data: Any, path: tuple, ctx: _Context, required: tuple[str, ...] = ()) -> Any:
    if not isinstance(data, dict):
        raise ctx.error(path, f"expected a mapping for {cls.__name__}, got {data!r}")
    hints = typing.get_type_hints(cls)
    names = {f.name for f in dataclasses.fields(cls) if f.init}
    for key in data:
        if key not in names:
            raise ctx.error(path + (key,), f"unknown key {key!r}; allowed: {', '.join(sorted(names))}")
    for key in required:
        if key not in data:
            raise ctx.error(path, f"missing required key {key!r}")
    kwargs = {k: _convert(hints[k], v, path + (k,), ctx) for k, v in data.items()}
    try:
        return cls(**kwargs)
    except (ValueError, TypeError) as exc:
        raise ctx.error(path, str(exc)) from exc


def _reward(data: dict, base: RewardConfig, path: tuple, ctx: _Context) -> RewardConfig:
    merged = {f.name: getattr(base, f.name) for f in dataclasses.fields(RewardConfig)}
    built = _build(RewardConfig, data, path, ctx)
    for key in data:
        merged[key] = getattr(built, key)
    return RewardConfig(**merged)


def parse_config(text: str, source: str = "<string>") -> RunConfig:
    try:
        root = yaml.compose(text)
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        line = mark.line + 1 if mark is not None else 1
        raise ConfigError(f"{source}:{line}: invalid YAML: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"{source}:1: top level must be a mapping")
    ctx = _Context(source, _positions(root))
    allowed = set(REQUIRED) | set(_SCALARS) | {"train", "reward", "curriculum", "eval", "bench"}
    for key in data:
        if key not in allowed:
            raise ctx.error((key,), f"unknown key {key!r}; allowed: {', '.join(sorted(allowed))}")
    for key in REQUIRED:
        if key not in data:
            raise ctx.error((), f"missing required key {key!r}")

    env_data = data["env"]
    if not isinstance(env_data, dict):
        raise ctx.error(("env",), "expected a mapping")
    if "distribution" not in env_data:
        raise ctx.error(("env",), "missing required key 'distribution'")
    env = _build(EnvConfig, env_data, ("env",), ctx)
    arch = _build(ArchSpec, data["arch"], ("arch",), ctx)
    seed = _convert(int, data.get("seed", 0), ("seed",), ctx)
    es_data = dict(data["es"] or {})
    if "seed" in es_data:
        raise ctx.error(("es", "seed"), "set the seed at the top level")
    es = _build(ESConfig, es_data, ("es",), ctx)
    es = replace(es, seed=seed)

    base_reward = RewardConfig().with_robot(env.robot)
    reward = _reward(data.get("reward") or {}, base_reward, ("reward",), ctx)
    stages = []
    curriculum = data.get("curriculum") or []
    if not isinstance(curriculum, list):
        raise ctx.error(("curriculum",), "expected a list of stages")
    for i, raw in enumerate(curriculum):
        path = ("curriculum", i)
        if isinstance(raw, dict) and "distribution" not in raw:
            raise ctx.error(path, "missing required key 'distribution'")
        section = _build(StageSection, raw, path, ctx)
        stage_reward = _reward(section.reward, reward, path + ("reward",), ctx)
        stages.append(CurriculumStage(i, section.distribution, stage_reward, section.advance, section.phase, section.name))

    cfg = RunConfig(
        env=env, arch=arch, es=es,
        train=_build(TrainSection, data.get("train") or {}, ("train",), ctx),
        reward=reward, curriculum=stages,
        eval=_build(EvalSection, data.get("eval") or {}, ("eval",), ctx),
        bench=_build(BenchSection, data.get("bench") or {}, ("bench",), ctx),
        seed=seed,
        workers=_convert(int, data.get("workers", 1), ("workers",), ctx),
        out_dir=_convert(str, data.get("out_dir", "runs/default"), ("out_dir",), ctx),
        source=source,
    )
    if cfg.workers < 1:
        raise ctx.error(("workers",), "must be >= 1")
    try:
        cfg.train_config()
    except ValueError as exc:
        raise ctx.error(("train",), str(exc)) from exc
    return cfg


def load_config(path: str | Path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read config: {exc}") from exc
    return parse_config(text, str(path))


def shipped_config(name: str) -> Path:
    """Path of a configuration bundled with the package (name without .yaml)."""
    path = Path(__file__).parent / "configs" / f"{name}.yaml"
    if not path.exists():
        raise FileNotFoundError(f"no shipped config named {name!r}")
    return path


__all__ = [
    "BenchSection", "ConfigError", "EvalSection", "RunConfig", "StageSection", "TrainSection",
    "load_config", "parse_config", "shipped_config",
    "PhysicsConfig", "RobotModel", "NoiseDelayModel",
]
