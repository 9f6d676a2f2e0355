"""Architecture descriptors and the flat parameter layout."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

GATED_CNN = "gated_cnn"
MLP = "mlp"


@dataclass(frozen=True)
class ConvLayer:
    c_in: int
    c_out: int
    kernel: int
    dilation: int
    gated: bool

    @property
    def weight_shape(self) -> tuple[int, int, int]:
        # Gated layers emit 2 * c_out channels: the tanh branch, then the gate.
        return ((2 if self.gated else 1) * self.c_out, self.c_in, self.kernel)

    @property
    def size(self) -> int:
        w = self.weight_shape
        return w[0] * w[1] * w[2] + w[0]


@dataclass(frozen=True)
class ArchSpec:
    """Controller family and its shape.

    Defaults give the 3-layer gated temporal CNN; ``kind="mlp"`` selects the
    dense baseline with ``hidden`` units.
    """

    kind: str = GATED_CNN
    history: int = 8
    features: int = 11
    action_dim: int = 8
    channels: tuple[int, ...] = (8, 12, 8)
    kernel: int = 2
    dilations: tuple[int, ...] = (1, 2, 4)
    gated: tuple[bool, ...] = (True, True, False)
    hidden: tuple[int, ...] = (50, 10)
    # Low-pass cutoff applied to actions in Hz; None disables the filter.
    action_filter_hz: float | None = None

    def __post_init__(self) -> None:
        if self.kind not in (GATED_CNN, MLP):
            raise ValueError(f"unknown architecture kind {self.kind!r}")
        if self.kind == GATED_CNN:
            if not len(self.channels) == len(self.dilations) == len(self.gated):
                raise ValueError("channels, dilations and gated must have equal length")
            if self.channels[-1] != self.action_dim:
                raise ValueError("last conv layer must have action_dim channels")
            if self.receptive_field != self.history:
                raise ValueError(
                    f"receptive field {self.receptive_field} must equal history {self.history}"
                )
        if self.action_filter_hz is not None and not 0 < self.action_filter_hz < 50:
            raise ValueError("action_filter_hz must lie in (0, 50) Hz")

    @property
    def receptive_field(self) -> int:
        return 1 + sum(d * (self.kernel - 1) for d in self.dilations)

    @property
    def conv_layers(self) -> list[ConvLayer]:
        layers = []
        c_in = self.features
        for c, d, g in zip(self.channels, self.dilations, self.gated):
            layers.append(ConvLayer(c_in, c, self.kernel, d, g))
            c_in = c
        return layers

    @property
    def dense_shapes(self) -> list[tuple[int, int]]:
        sizes = (self.history * self.features,) + tuple(self.hidden) + (self.action_dim,)
        return [(sizes[i + 1], sizes[i]) for i in range(len(sizes) - 1)]

    def layer_shapes(self) -> list[tuple[int, int]]:
        """(time length, channels) of the input and of every layer output."""
        if self.kind == MLP:
            return [(1, self.history * self.features)] + [(1, o) for o, _ in self.dense_shapes]
        shapes = [(self.history, self.features)]
        length = self.history
        for layer in self.conv_layers:
            length -= layer.dilation * (layer.kernel - 1)
            shapes.append((length, layer.c_out))
        return shapes

    @property
    def num_params(self) -> int:
        if self.kind == MLP:
            return sum(o * i + o for o, i in self.dense_shapes)
        return sum(layer.size for layer in self.conv_layers)


def unflatten(theta: np.ndarray, spec: ArchSpec) -> list[tuple[np.ndarray, np.ndarray]]:
    """Split a flat vector (or a stack of them, shape (..., P)) into per-layer (weight, bias) views.

    Each layer stores its weight in C order followed by its bias.
    """
    theta = np.asarray(theta, dtype=float)
    if theta.shape[-1:] != (spec.num_params,):
        raise ValueError(f"expected {spec.num_params} parameters, got shape {theta.shape}")
    lead = theta.shape[:-1]
    shapes = (
        [layer.weight_shape for layer in spec.conv_layers] if spec.kind == GATED_CNN else spec.dense_shapes
    )
    out = []
    pos = 0
    for shape in shapes:
        n_w = int(np.prod(shape))
        w = theta[..., pos:pos + n_w].reshape(lead + tuple(shape))
        pos += n_w
        b = theta[..., pos:pos + shape[0]]
        pos += shape[0]
        out.append((w, b))
    return out


def flatten(layers: list[tuple[np.ndarray, np.ndarray]]) -> np.ndarray:
    return np.concatenate([np.concatenate([np.ravel(w), np.ravel(b)]) for w, b in layers])


def zeros(spec: ArchSpec) -> np.ndarray:
    return np.zeros(spec.num_params)


INIT_SCHEMES = ("zeros", "output_zero")


def initial_params(spec: ArchSpec, scheme: str = "zeros", seed: int = 0) -> np.ndarray:
    """Starting parameters.

    ``zeros`` is the all-zero vector. ``output_zero`` draws hidden weights
    from N(0, 1/fan_in) and zeroes the output layer and all biases, so the
    first action is still exactly zero but every hidden unit already
    carries signal.
    """
    if scheme not in INIT_SCHEMES:
        raise ValueError(f"init scheme must be one of {INIT_SCHEMES}, got {scheme!r}")
    theta = zeros(spec)
    if scheme == "zeros":
        return theta
    rng = np.random.default_rng(np.random.SeedSequence([seed, 0x1A17]))
    layers = unflatten(theta, spec)
    for w, _ in layers[:-1]:
        fan_in = int(np.prod(w.shape[1:]))
        w[...] = rng.standard_normal(w.shape) / np.sqrt(fan_in)
    return theta
