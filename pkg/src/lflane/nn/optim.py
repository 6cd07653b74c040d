"""Adam optimizer and the stepped learning-rate schedule.

Parameters live in plain dicts mapping name -> float64 ndarray; the optimizer
is functional (returns fresh dicts) so training steps are easy to test and
checkpoints can serialize optimizer state directly.
"""

from dataclasses import dataclass, field

import numpy as np

from ..errors import ValidationError


@dataclass
class AdamState:
    """First/second moment accumulators plus the shared step counter."""

    step: int = 0
    m: dict = field(default_factory=dict)
    v: dict = field(default_factory=dict)


def adam_init(params: dict) -> AdamState:
    return AdamState(
        step=0,
        m={k: np.zeros_like(p) for k, p in params.items()},
        v={k: np.zeros_like(p) for k, p in params.items()},
    )


def adam_step(params: dict, grads: dict, state: AdamState, lr: float,
              beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
    """One bias-corrected Adam update; returns (new_params, new_state)."""
    if set(params) != set(grads):
        raise ValidationError("parameter and gradient dicts must share keys")
    t = state.step + 1
    new_params, new_m, new_v = {}, {}, {}
    for k, p in params.items():
        g = grads[k]
        m = beta1 * state.m[k] + (1.0 - beta1) * g
        v = beta2 * state.v[k] + (1.0 - beta2) * g * g
        m_hat = m / (1.0 - beta1 ** t)
        v_hat = v / (1.0 - beta2 ** t)
        new_params[k] = p - lr * m_hat / (np.sqrt(v_hat) + eps)
        new_m[k] = m
        new_v[k] = v
    return new_params, AdamState(step=t, m=new_m, v=new_v)


@dataclass(frozen=True)
class LrSchedule:
    """Step decay: lr = base_lr * decay ** (epoch // decay_every)."""

    base_lr: float = 3e-4
    decay: float = 0.1
    decay_every: int = 20

    def __post_init__(self):
        if self.base_lr <= 0 or self.decay <= 0 or self.decay_every < 1:
            raise ValidationError("schedule parameters must be positive")


def lr_at_epoch(schedule: LrSchedule, epoch: int) -> float:
    if epoch < 0:
        raise ValidationError("epoch must be non-negative")
    return schedule.base_lr * schedule.decay ** (epoch // schedule.decay_every)
