"""Forward passes for the gated temporal CNN and the MLP baseline.

All functions accept either one observation (T, F) or a batch (B, T, F).
Parameters may be one flat vector shared by the batch or one row per
observation, shape (B, P).
"""

from __future__ import annotations

import numpy as np

from .arch import GATED_CNN, ArchSpec, unflatten
from .normalization import RunningStats


def _sigmoid(x: np.ndarray) -> np.ndarray:
    return 0.5 * (1.0 + np.tanh(0.5 * x))


def conv1d(x: np.ndarray, weight: np.ndarray, bias: np.ndarray, dilation: int) -> np.ndarray:
    """Valid dilated convolution over time; x is (..., L, C_in), weight (..., C_out, C_in, K).

    Tap k of output step i reads input step i + k * dilation, so the last
    tap sees the newest sample.
    """
    c_out, c_in, k = weight.shape[-3:]
    length = x.shape[-2] - dilation * (k - 1)
    if length < 1:
        raise ValueError(f"input length {x.shape[-2]} too short for kernel {k} at dilation {dilation}")
    if x.shape[-1] != c_in:
        raise ValueError(f"expected {c_in} input channels, got {x.shape[-1]}")
    out = bias[..., None, :]
    for tap in range(k):
        start = tap * dilation
        out = out + x[..., start:start + length, :] @ np.swapaxes(weight[..., tap], -1, -2)
    return out


def gated_conv_layer(
    x: np.ndarray, weight: np.ndarray, bias: np.ndarray, gated: bool, dilation: int = 1
) -> np.ndarray:
    """tanh(o1) * sigmoid(o2) for gated layers, tanh(o1) otherwise."""
    o = conv1d(x, weight, bias, dilation)
    if not gated:
        return np.tanh(o)
    c = weight.shape[-3] // 2
    return np.tanh(o[..., :c]) * _sigmoid(o[..., c:])


def _cnn(x: np.ndarray, theta: np.ndarray, spec: ArchSpec) -> np.ndarray:
    for layer, (w, b) in zip(spec.conv_layers, unflatten(theta, spec)):
        x = gated_conv_layer(x, w, b, layer.gated, layer.dilation)
    return x[..., -1, :]


def _mlp(x: np.ndarray, theta: np.ndarray, spec: ArchSpec) -> np.ndarray:
    h = x.reshape(x.shape[:-2] + (-1,))
    layers = unflatten(theta, spec)
    for i, (w, b) in enumerate(layers):
        h = (w @ h[..., None])[..., 0] + b
        if i < len(layers) - 1:
            h = np.tanh(h)
    return h


def _prepare(obs: np.ndarray, spec: ArchSpec, stats: RunningStats | None) -> np.ndarray:
    obs = np.asarray(obs, dtype=float)
    if obs.shape[-2:] != (spec.history, spec.features):
        raise ValueError(f"observation must end in shape {(spec.history, spec.features)}, got {obs.shape}")
    return stats.normalize(obs) if stats is not None else obs


def policy_forward(
    obs: np.ndarray,
    theta: np.ndarray,
    spec: ArchSpec,
    stats: RunningStats | None = None,
    velocity_limits: np.ndarray | None = None,
) -> np.ndarray:
    """Gated CNN action in [-1, 1]^8, scaled by ``velocity_limits`` when given."""
    out = _cnn(_prepare(obs, spec, stats), theta, spec)
    return out * velocity_limits if velocity_limits is not None else out


def mlp_forward(
    obs: np.ndarray,
    theta: np.ndarray,
    spec: ArchSpec,
    stats: RunningStats | None = None,
    velocity_limits: np.ndarray | None = None,
) -> np.ndarray:
    """MLP action; the linear output is scaled by ``velocity_limits`` when given."""
    out = _mlp(_prepare(obs, spec, stats), theta, spec)
    return out * velocity_limits if velocity_limits is not None else out


def forward(obs, theta, spec: ArchSpec, stats=None, velocity_limits=None) -> np.ndarray:
    fn = policy_forward if spec.kind == GATED_CNN else mlp_forward
    return fn(obs, theta, spec, stats, velocity_limits)
