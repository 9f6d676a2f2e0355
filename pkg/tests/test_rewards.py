from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import point_to_box_distance
from tabletennis_es.rewards import (
    EpisodeRecord,
    RewardConfig,
    RewardStream,
    canonical,
    center_weight,
    dtr_reward,
    pose_reward_cps,
    pose_reward_cpt,
    pose_reward_dcps,
    reach_reward,
    sparse_only,
    sparse_rewards,
    style_penalties,
    total_reward,
)
from tabletennis_es.rewards.terms import TERMS
from tabletennis_es.sim import PhysicsConfig, RobotModel
from tabletennis_es.sim.ball import distance_to_opponent_table
from tabletennis_es.sim.robot import J1, J4

ROBOT = RobotModel()
FORE = np.array(ROBOT.forehand_pose)
BACK = np.array(ROBOT.backhand_pose)


def _record(q, paddle_z=0.5, **kw) -> EpisodeRecord:
    q = np.asarray(q, dtype=float)
    paddle = np.zeros((len(q), 3))
    paddle[:, 2] = paddle_z
    return EpisodeRecord(q=q, paddle=paddle, ball=np.zeros((len(q), 3)), **kw)


def _still(pose=FORE, n=20, **kw) -> EpisodeRecord:
    return _record(np.repeat(np.asarray(pose)[None], n + 1, axis=0), **kw)


def _random_record(rng) -> EpisodeRecord:
    n = int(rng.integers(1, 120))
    q = FORE + np.cumsum(rng.normal(0, 0.3, (n + 1, 8)), axis=0)
    hit = bool(rng.random() < 0.5)
    rec = _record(q, paddle_z=0.0, hit=hit, success=hit and bool(rng.random() < 0.5),
                  self_collision=bool(rng.random() < 0.3), landing_x=float(rng.uniform(-0.7, 0.7)),
                  contact_step=int(rng.integers(0, n)) if hit else -1,
                  min_table_distance=float(rng.uniform(0, 4)) if hit else float("inf"),
                  min_paddle_distance=float(rng.uniform(0, 4)))
    rec.paddle[:, 2] = rng.uniform(-0.1, 0.3, n + 1)
    return rec


class TestSparse:
    def test_values(self):
        assert sparse_rewards(_still()) == 0
        assert sparse_rewards(_still(hit=True)) == 1
        assert sparse_rewards(_still(hit=True, success=True)) == 2

    def test_st_config_equals_sparse(self, rng):
        for _ in range(20):
            rec = _random_record(rng)
            assert total_reward(rec, sparse_only())[0] == sparse_rewards(rec)


class TestPenalties:
    def test_motionless_is_free(self):
        raw = style_penalties(_still(), canonical())
        assert all(v == 0 for v in raw.values())
        assert total_reward(_still(), canonical())[0] == 0

    def test_single_velocity_excess(self):
        q = np.repeat(FORE[None], 4, axis=0)
        q[2:, 0] += 0.01 * 27.5  # one step at 27.5 rad/s on joint 0
        cfg = RewardConfig(v=0.1, v_limit=25.0)
        assert style_penalties(_record(q), cfg)["v"] == pytest.approx(-2.5, abs=1e-9)
        assert total_reward(_record(q), cfg)[1]["v"] == pytest.approx(-0.25, abs=1e-10)

    def test_joint_limit_grazing(self):
        cfg = RewardConfig(ja=2.0)
        lo, hi = np.array(cfg.joint_lower), np.array(cfg.joint_upper)
        margin = 0.05 * (hi[3] - lo[3])
        q = np.repeat(FORE[None], 11, axis=0)
        k, gap = 4, 0.25 * margin
        q[1:k + 1, 3] = hi[3] - gap
        raw = style_penalties(_record(q), cfg)["ja"]
        assert raw == pytest.approx(-k * (margin - gap), rel=1e-12)
        assert total_reward(_record(q), cfg)[1]["ja"] == pytest.approx(-2.0 * k * (margin - gap), rel=1e-12)

    def test_base_rotation_and_paddle_height(self):
        cfg = canonical()
        q = np.repeat(FORE[None], 6, axis=0)
        q[1:, J1] = -(cfg.bbr_threshold + 0.1)
        rec = _record(q, paddle_z=0.02)
        raw = style_penalties(rec, cfg)
        assert raw["bbr"] == pytest.approx(-0.5, abs=1e-12)
        assert raw["ph"] == pytest.approx(-5 * 0.03, abs=1e-12)

    def test_collision(self):
        assert style_penalties(_still(table_collision=True), canonical())["ic"] == -1.0

    def test_all_nonpositive(self, rng):
        cfg = canonical()
        for _ in range(30):
            assert all(v <= 0 for v in style_penalties(_random_record(rng), cfg).values())


class TestPoseRewards:
    def test_cps_through_reference(self):
        q = np.stack([BACK, FORE, BACK])
        assert pose_reward_cps(_record(q, landing_x=0.5), RewardConfig()) == 1.0

    def test_cps_constant_offset(self):
        cfg = RewardConfig(pose_scale=1.0)
        pose = FORE.copy()
        pose[0] += 0.3
        pose[1] += 0.4
        assert pose_reward_cps(_still(pose, landing_x=0.4), cfg) == pytest.approx(0.5, abs=1e-12)

    def test_backhand_ignores_forehand_reference(self):
        rec = _still(BACK + 0.1, landing_x=-0.4)
        a = pose_reward_cps(rec, RewardConfig(pose_scale=1.0))
        b = pose_reward_cps(rec, RewardConfig(pose_scale=1.0, forehand_pose=tuple(FORE + 1.0)))
        assert a == b

    def test_cps_only_before_contact(self):
        q = np.stack([FORE, FORE, BACK, BACK])
        rec = _record(q, contact_step=0, hit=True)
        assert pose_reward_cps(rec, RewardConfig(), "backhand") < 1.0

    def test_center_weight(self):
        assert center_weight(0.0) == 0.0
        assert center_weight(0.1) == pytest.approx(0.5)
        assert center_weight(-0.3) == 1.0

    def test_dcps_center_is_zero(self, rng):
        for _ in range(20):
            rec = _random_record(rng)
            rec.landing_x = 0.0
            assert pose_reward_dcps(rec, RewardConfig()) == 0.0

    def test_dcps_equidistant_pose(self):
        mid = 0.5 * (FORE + BACK)
        assert pose_reward_dcps(_still(mid, landing_x=0.5), RewardConfig()) == pytest.approx(0.0, abs=1e-15)

    def test_dcps_at_forehand_reference(self):
        cfg = RewardConfig()
        rec = _still(FORE, landing_x=0.6)
        d_back = np.linalg.norm(FORE - BACK) / cfg.scale
        assert pose_reward_dcps(rec, cfg) == pytest.approx(d_back, abs=1e-12)
        assert pose_reward_dcps(rec, cfg, landing_x=0.1) == pytest.approx(0.5 * d_back, abs=1e-12)

    def test_dcps_antisymmetry(self, rng):
        # Mirroring the poses through the reference midpoint swaps the two
        # reference distances; flipping the throw side flips the sign. Each
        # negates the reward on its own, so doing both leaves it unchanged.
        cfg = RewardConfig()
        for _ in range(20):
            rec = _random_record(rng)
            x = rng.uniform(0.05, 0.7)
            base = pose_reward_dcps(rec, cfg, x)
            mirrored = _record(FORE + BACK - rec.q, contact_step=rec.contact_step)
            assert pose_reward_dcps(rec, cfg, -x) == pytest.approx(-base, abs=1e-12)
            assert pose_reward_dcps(mirrored, cfg, x) == pytest.approx(-base, abs=1e-12)
            assert pose_reward_dcps(mirrored, cfg, -x) == pytest.approx(base, abs=1e-12)

    def test_cpt_cases(self):
        cfg = RewardConfig()
        assert pose_reward_cpt(_still(FORE), cfg, 0.5) == 1.0
        assert pose_reward_cpt(_still(FORE), cfg, -0.5) == -1.0
        assert pose_reward_cpt(_still(FORE), cfg, 0.1) == pytest.approx(0.5)
        neither = FORE.copy()
        neither[J4] = -1.0
        assert pose_reward_cpt(_still(neither), cfg, 0.5) == 0.0
        half = np.vstack([np.repeat(FORE[None], 4, 0), np.repeat(BACK[None], 4, 0)])
        assert pose_reward_cpt(_record(half), cfg, 0.5) == 0.0

    def test_bounded_by_weight(self, rng):
        cfg = RewardConfig()
        for _ in range(50):
            rec = _random_record(rng)
            w = center_weight(rec.landing_x)
            assert abs(pose_reward_cpt(rec, cfg)) <= w + 1e-15
            assert abs(pose_reward_dcps(rec, cfg)) <= w * 2 * (1 + 1e-12)


class TestSuccessShaping:
    def test_dtr_values(self):
        assert dtr_reward(_still(hit=True, success=True, min_table_distance=0.0)) == 1.0
        assert dtr_reward(_still(hit=True, min_table_distance=3.5)) == -2.0
        assert dtr_reward(_still(min_table_distance=0.1)) == 0.0

    def test_dtr_from_trajectory(self):
        # A return flying 0.4 m above the opponent half, sampled densely.
        phys = PhysicsConfig()
        y = np.linspace(-0.5, 2.0, 501)
        pts = np.column_stack([np.full_like(y, 0.3), y, np.full_like(y, 0.4)])
        lo = np.array([-phys.half_width, 0.0, 0.0])
        hi = np.array([phys.half_width, phys.half_length, 0.0])
        d = float(distance_to_opponent_table(pts, phys).min())
        assert d == pytest.approx(min(point_to_box_distance(p, lo, hi) for p in pts), abs=1e-12)
        assert dtr_reward(_still(hit=True, min_table_distance=d)) == pytest.approx(0.6, abs=1e-12)

    @settings(max_examples=200, deadline=None)
    @given(st.floats(0.0, 1e6), st.booleans())
    def test_dtr_range(self, d, hit):
        r = dtr_reward(_still(n=2, hit=hit, min_table_distance=d))
        assert -2.0 <= r <= 1.0

    def test_landing_bonus(self):
        cfg = RewardConfig(success_mode="landing_bonus", landing_bonus=1.5)
        assert total_reward(_still(hit=True, success=True), cfg)[0] == 3.5
        assert total_reward(_still(hit=True), cfg)[0] == 1.0

    def test_reach(self):
        assert reach_reward(_still(hit=True, min_paddle_distance=9.0)) == 1.0
        assert reach_reward(_still(min_paddle_distance=0.25)) == 0.75
        assert reach_reward(_still(min_paddle_distance=9.0)) == -2.0


class TestCombination:
    def test_breakdown_sums_to_total(self, rng):
        cfg = canonical(pose_mode="dcps", success_mode="dtr", reach=0.5)
        for _ in range(30):
            total, parts = total_reward(_random_record(rng), cfg)
            assert set(parts) == set(TERMS)
            assert abs(total - sum(parts.values())) < 1e-12

    def test_linear_in_weights(self, rng):
        rec = _random_record(rng)
        for name in ("ic", "bbr", "ph", "ja", "v", "a", "j"):
            one = total_reward(rec, canonical(**{name: 0.3}))[1][name]
            two = total_reward(rec, canonical(**{name: 0.6}))[1][name]
            assert two == 2 * one

    def test_invalid(self):
        with pytest.raises(ValueError):
            RewardConfig(pose_mode="both")
        with pytest.raises(ValueError):
            RewardConfig(success_mode="x")
        with pytest.raises(ValueError):
            RewardConfig(ic=float("nan"))


class TestStreaming:
    def test_stream_matches_batch_exactly(self, rng):
        cfg = canonical(pose_mode="cpt", success_mode="dtr", v_limit=5.0, a_limit=200.0, j_limit=5000.0)
        for _ in range(100):
            rec = _random_record(rng)
            stream = RewardStream(cfg, rec.q[0], rec.dt)
            for k in range(1, len(rec.q)):
                stream.push(rec.q[k], rec.paddle[k, 2])
            a, pa = stream.finish(rec)
            b, pb = total_reward(rec, cfg)
            assert abs(a - b) <= 1e-12
            assert pa == pb
