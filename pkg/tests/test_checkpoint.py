from __future__ import annotations

import json

import numpy as np
import pytest

from tabletennis_es.policy import (
    MLP,
    ArchSpec,
    Checkpoint,
    CheckpointError,
    RunningStats,
    load_checkpoint,
    save_checkpoint,
)


@pytest.fixture
def ckpt(rng):
    spec = ArchSpec(action_filter_hz=5.0)
    stats = RunningStats(11).update(rng.standard_normal((30, 11)))
    return Checkpoint(spec, rng.standard_normal(spec.num_params), stats, stage=2, iteration=40, extra={"seed": 3})


class TestCheckpoint:
    def test_roundtrip_is_exact(self, ckpt, tmp_path):
        path = save_checkpoint(ckpt, tmp_path / "c.json")
        back = load_checkpoint(path)
        assert back.arch == ckpt.arch
        assert np.array_equal(back.theta, ckpt.theta)
        assert np.array_equal(back.stats.m2, ckpt.stats.m2)
        assert (back.stage, back.iteration, back.extra) == (2, 40, {"seed": 3})

    def test_bytes_are_stable(self, ckpt, tmp_path):
        a = save_checkpoint(ckpt, tmp_path / "a.json").read_bytes()
        b = save_checkpoint(load_checkpoint(tmp_path / "a.json"), tmp_path / "b.json").read_bytes()
        assert a == b
        assert not list(tmp_path.glob("*.tmp"))

    def test_architecture_mismatch(self, ckpt, tmp_path):
        path = save_checkpoint(ckpt, tmp_path / "c.json")
        with pytest.raises(CheckpointError, match="mlp"):
            load_checkpoint(path, expect=ArchSpec(kind=MLP))

    def test_corrupt_files(self, ckpt, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text("{not json")
        with pytest.raises(CheckpointError):
            load_checkpoint(bad)
        d = ckpt.to_dict()
        d["version"] = 99
        bad.write_text(json.dumps(d))
        with pytest.raises(CheckpointError):
            load_checkpoint(bad)
        d = ckpt.to_dict()
        d["theta"] = d["theta"][:-1]
        bad.write_text(json.dumps(d))
        with pytest.raises(CheckpointError):
            load_checkpoint(bad)
        with pytest.raises(CheckpointError):
            load_checkpoint(tmp_path / "missing.json")
