from __future__ import annotations

import numpy as np
import pytest

from oracles import dense_mlp, direct_conv, gated_oracle
from tabletennis_es.policy import (
    MLP,
    ArchSpec,
    RunningStats,
    flatten,
    forward,
    gated_conv_layer,
    mlp_forward,
    policy_forward,
    unflatten,
    zeros,
)
from tabletennis_es.policy.arch import initial_params
from tabletennis_es.policy.networks import conv1d


class TestArchitecture:
    def test_parameter_count(self):
        assert ArchSpec().num_params == 976

    def test_layer_shapes(self):
        assert ArchSpec().layer_shapes() == [(8, 11), (7, 8), (5, 12), (1, 8)]

    def test_per_layer_sizes(self):
        # Two gated layers (doubled output channels) and a plain output layer.
        sizes = [layer.size for layer in ArchSpec().conv_layers]
        assert sizes == [16 * 11 * 2 + 16, 24 * 8 * 2 + 24, 8 * 12 * 2 + 8]

    def test_mlp_count(self):
        spec = ArchSpec(kind=MLP)
        assert spec.num_params == 88 * 50 + 50 + 50 * 10 + 10 + 10 * 8 + 8

    def test_flatten_roundtrip(self, rng):
        spec = ArchSpec()
        theta = rng.standard_normal(spec.num_params)
        assert np.array_equal(flatten(unflatten(theta, spec)), theta)

    def test_weight_layout_is_c_order(self):
        spec = ArchSpec()
        theta = np.arange(spec.num_params, dtype=float)
        w, b = unflatten(theta, spec)[0]
        assert w.shape == (16, 11, 2)
        assert w[0, 0, 1] == 1.0 and w[0, 1, 0] == 2.0 and w[1, 0, 0] == 22.0
        assert b[0] == 352.0

    def test_wrong_length_rejected(self):
        with pytest.raises(ValueError):
            unflatten(np.zeros(975), ArchSpec())

    def test_receptive_field_must_match_history(self):
        with pytest.raises(ValueError):
            ArchSpec(history=10)
        with pytest.raises(ValueError):
            ArchSpec(kind="rnn")

    def test_output_zero_init(self):
        spec = ArchSpec()
        theta = initial_params(spec, "output_zero", seed=3)
        layers = unflatten(theta, spec)
        assert np.all(layers[-1][0] == 0) and all(np.all(b == 0) for _, b in layers)
        assert np.std(layers[0][0]) > 0.1
        obs = np.random.default_rng(0).standard_normal((4, 8, 11))
        assert np.array_equal(policy_forward(obs, theta, spec), np.zeros((4, 8)))
        assert np.array_equal(initial_params(spec, "zeros"), zeros(spec))
        with pytest.raises(ValueError):
            initial_params(spec, "xavier")


class TestConvolution:
    @pytest.mark.parametrize("dilation", [1, 2, 4])
    def test_conv_matches_loops(self, rng, dilation):
        x = rng.standard_normal((9, 5))
        w = rng.standard_normal((6, 5, 2))
        b = rng.standard_normal(6)
        assert np.allclose(conv1d(x, w, b, dilation), direct_conv(x, w, b, dilation), atol=1e-12)

    @pytest.mark.parametrize("gated", [True, False])
    def test_gated_layer_matches_oracle(self, rng, gated):
        x = rng.standard_normal((8, 11))
        w = rng.standard_normal((16, 11, 2))
        b = rng.standard_normal(16)
        got = gated_conv_layer(x, w, b, gated, 2)
        assert np.allclose(got, gated_oracle(x, w, b, 2, gated), atol=1e-12)

    def test_too_short_input(self, rng):
        with pytest.raises(ValueError):
            conv1d(rng.standard_normal((3, 2)), rng.standard_normal((1, 2, 2)), np.zeros(1), 4)

    def test_full_network_matches_oracle(self, rng):
        spec = ArchSpec()
        theta = rng.standard_normal(spec.num_params) * 0.5
        obs = rng.standard_normal((8, 11))
        h = obs
        for layer, (w, b) in zip(spec.conv_layers, unflatten(theta, spec)):
            h = gated_oracle(h, w, b, layer.dilation, layer.gated)
        assert np.allclose(policy_forward(obs, theta, spec), h[-1], atol=1e-12)

    def test_output_depends_on_whole_window(self, rng):
        spec = ArchSpec()
        theta = rng.standard_normal(spec.num_params)
        obs = rng.standard_normal((8, 11))
        base = policy_forward(obs, theta, spec)
        for t in range(8):
            moved = obs.copy()
            moved[t] += 1.0
            assert not np.allclose(policy_forward(moved, theta, spec), base)

    def test_pure_function(self, rng):
        spec = ArchSpec()
        theta = rng.standard_normal(spec.num_params)
        obs = rng.standard_normal((3, 8, 11))
        assert np.array_equal(policy_forward(obs, theta, spec), policy_forward(obs.copy(), theta.copy(), spec))

    def test_batched_and_per_sample_params(self, rng):
        spec = ArchSpec()
        thetas = rng.standard_normal((5, spec.num_params))
        obs = rng.standard_normal((5, 8, 11))
        batched = policy_forward(obs, thetas, spec)
        for i in range(5):
            assert np.allclose(batched[i], policy_forward(obs[i], thetas[i], spec), atol=1e-12)
        shared = policy_forward(obs, thetas[0], spec)
        assert np.allclose(shared[3], policy_forward(obs[3], thetas[0], spec), atol=1e-12)

    def test_output_range_and_scaling(self, rng):
        spec = ArchSpec()
        theta = rng.standard_normal(spec.num_params) * 5
        obs = rng.standard_normal((20, 8, 11)) * 5
        out = policy_forward(obs, theta, spec)
        assert np.abs(out).max() <= 1.0
        limits = np.arange(1.0, 9.0)
        assert np.allclose(policy_forward(obs, theta, spec, velocity_limits=limits), out * limits)

    def test_normalization_applied(self, rng):
        spec = ArchSpec()
        theta = rng.standard_normal(spec.num_params)
        stats = RunningStats(11).update(rng.standard_normal((100, 11)) * 3 + 1)
        obs = rng.standard_normal((8, 11))
        assert np.allclose(policy_forward(obs, theta, spec, stats), policy_forward(stats.normalize(obs), theta, spec))

    def test_bad_observation_shape(self, rng):
        with pytest.raises(ValueError):
            policy_forward(np.zeros((7, 11)), zeros(ArchSpec()), ArchSpec())


class TestMLP:
    def test_matches_dense_oracle(self, rng):
        spec = ArchSpec(kind=MLP)
        theta = rng.standard_normal(spec.num_params) * 0.3
        obs = rng.standard_normal((8, 11))
        want = dense_mlp(obs, unflatten(theta, spec))
        assert np.allclose(mlp_forward(obs, theta, spec), want, atol=1e-12)
        assert np.allclose(forward(obs, theta, spec), want, atol=1e-12)

    def test_batched(self, rng):
        spec = ArchSpec(kind=MLP)
        thetas = rng.standard_normal((3, spec.num_params))
        obs = rng.standard_normal((3, 8, 11))
        out = mlp_forward(obs, thetas, spec)
        for i in range(3):
            assert np.allclose(out[i], mlp_forward(obs[i], thetas[i], spec))
