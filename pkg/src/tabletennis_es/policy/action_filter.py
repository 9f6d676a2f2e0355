"""Second-order Butterworth low-pass filter for joint-velocity commands."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


def butterworth_coefficients(cutoff_hz: float, sample_hz: float = 100.0) -> tuple[np.ndarray, np.ndarray]:
    """(b, a) of the bilinear-transform 2nd-order low-pass with a prewarped cutoff."""
    nyquist = 0.5 * sample_hz
    if not 0 < cutoff_hz < nyquist:
        raise ValueError(f"cutoff {cutoff_hz} Hz must lie in (0, {nyquist}) Hz")
    k = math.tan(math.pi * cutoff_hz / sample_hz)
    q = math.sqrt(2.0)
    norm = 1.0 / (1.0 + q * k + k * k)
    b0 = k * k * norm
    b = np.array([b0, 2.0 * b0, b0])
    a = np.array([1.0, 2.0 * (k * k - 1.0) * norm, (1.0 - q * k + k * k) * norm])
    return b, a


@dataclass
class FilterState:
    """Direct-form II transposed state for a bank of identical filters."""

    b: np.ndarray
    a: np.ndarray
    z: np.ndarray

    @classmethod
    def create(cls, cutoff_hz: float, shape: tuple[int, ...] | int = 8, sample_hz: float = 100.0) -> "FilterState":
        b, a = butterworth_coefficients(cutoff_hz, sample_hz)
        shape = (shape,) if isinstance(shape, int) else tuple(shape)
        return cls(b, a, np.zeros((2,) + shape))

    def reset(self) -> None:
        self.z[...] = 0.0


def filter_action(fs: FilterState, raw: np.ndarray) -> np.ndarray:
    """Filter one sample per channel and advance the state in place."""
    x = np.asarray(raw, dtype=float)
    b, a = fs.b, fs.a
    y = b[0] * x + fs.z[0]
    fs.z[0] = b[1] * x - a[1] * y + fs.z[1]
    fs.z[1] = b[2] * x - a[2] * y
    return y


def filter_signal(signal: np.ndarray, cutoff_hz: float, sample_hz: float = 100.0) -> np.ndarray:
    """Filter a whole sequence (time on axis 0) from a zero state."""
    signal = np.asarray(signal, dtype=float)
    fs = FilterState.create(cutoff_hz, signal.shape[1:], sample_hz)
    return np.stack([filter_action(fs, s) for s in signal])
