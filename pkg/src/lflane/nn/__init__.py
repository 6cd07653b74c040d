"""Minimal float64 neural-network primitives with hand-derived gradients.

Everything here is deterministic: no layer draws randomness at run time, and
all floating point work happens in float64 so gradient checks can use tight
tolerances. Forward functions return (output, cache) pairs; the matching
backward functions consume the cache and the upstream gradient.
"""

from .layers import (
    conv2d_backward,
    conv2d_forward,
    fc_backward,
    fc_forward,
    half_mse_loss,
    maxpool2d_backward,
    maxpool2d_forward,
    relu_backward,
    relu_forward,
)
from .lstm import lstm_backward, lstm_forward, lstm_step_backward, lstm_step_forward
from .optim import AdamState, LrSchedule, adam_init, adam_step, lr_at_epoch
from .gradcheck import gradcheck_battery, max_relative_error, numerical_gradient

__all__ = [
    "conv2d_forward", "conv2d_backward",
    "relu_forward", "relu_backward",
    "maxpool2d_forward", "maxpool2d_backward",
    "fc_forward", "fc_backward",
    "half_mse_loss",
    "lstm_step_forward", "lstm_step_backward", "lstm_forward", "lstm_backward",
    "AdamState", "adam_init", "adam_step", "LrSchedule", "lr_at_epoch",
    "numerical_gradient", "max_relative_error", "gradcheck_battery",
]
