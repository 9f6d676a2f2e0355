"""Controllers over flat parameter vectors, observation normalization and action filtering."""

from .action_filter import FilterState, butterworth_coefficients, filter_action, filter_signal
from .arch import GATED_CNN, MLP, ArchSpec, flatten, unflatten, zeros
from .checkpoint import Checkpoint, CheckpointError, load_checkpoint, save_checkpoint
from .networks import forward, gated_conv_layer, mlp_forward, policy_forward
from .normalization import RunningStats, normalize_observation, update_running_stats

__all__ = [
    "FilterState", "butterworth_coefficients", "filter_action", "filter_signal",
    "GATED_CNN", "MLP", "ArchSpec", "flatten", "unflatten", "zeros",
    "Checkpoint", "CheckpointError", "load_checkpoint", "save_checkpoint",
    "forward", "gated_conv_layer", "mlp_forward", "policy_forward",
    "RunningStats", "normalize_observation", "update_running_stats",
]
