"""Finite-difference verification of every analytic gradient.

The checker perturbs one tensor element at a time (central differences,
h = 1e-5 by default) and compares against the backward pass with the scaled
relative error |a - n| / max(|a|, |n|, floor). The floor (1e-4) switches the
comparison to an absolute one for near-zero gradients, where the relative
form would amplify pure round-off.

Array-valued layers are reduced to scalars by contracting the output with a
fixed random projection; the projection then doubles as the upstream
gradient for the analytic pass.
"""

import numpy as np

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

DEFAULT_STEP = 1e-5
ERROR_FLOOR = 1e-4


def numerical_gradient(f, x, h: float = DEFAULT_STEP) -> np.ndarray:
    """Central-difference gradient of the zero-argument scalar function f
    with respect to x, which f must read and which is perturbed in place."""
    grad = np.zeros_like(x)
    flat, gflat = x.reshape(-1), grad.reshape(-1)
    for i in range(flat.size):
        orig = flat[i]
        flat[i] = orig + h
        f_plus = f()
        flat[i] = orig - h
        f_minus = f()
        flat[i] = orig
        gflat[i] = (f_plus - f_minus) / (2.0 * h)
    return grad


def max_relative_error(analytic, numeric, floor: float = ERROR_FLOOR) -> float:
    a = np.asarray(analytic, dtype=np.float64)
    n = np.asarray(numeric, dtype=np.float64)
    denom = np.maximum(np.maximum(np.abs(a), np.abs(n)), floor)
    return float(np.max(np.abs(a - n) / denom)) if a.size else 0.0


def _worst(value_fn, pairs, h: float) -> float:
    worst = 0.0
    for x, analytic in pairs:
        numeric = numerical_gradient(value_fn, x, h)
        worst = max(worst, max_relative_error(analytic, numeric))
    return worst


def _conv_case(rng, stride, pad, h):
    x = rng.standard_normal((2, 2, 5, 6))
    w = 0.5 * rng.standard_normal((3, 2, 3, 3))
    b = rng.standard_normal(3)
    out, _ = conv2d_forward(x, w, b, stride, pad)
    r = rng.standard_normal(out.shape)

    def value():
        out, _ = conv2d_forward(x, w, b, stride, pad)
        return float(np.sum(out * r))

    _, cache = conv2d_forward(x, w, b, stride, pad)
    gx, gw, gb = conv2d_backward(r, cache)
    return _worst(value, [(x, gx), (w, gw), (b, gb)], h)


def _relu_case(rng, h):
    # Keep every element at least 0.2 away from the kink at zero.
    x = rng.uniform(0.2, 1.2, (3, 4, 5)) * rng.choice([-1.0, 1.0], (3, 4, 5))
    r = rng.standard_normal(x.shape)

    def value():
        out, _ = relu_forward(x)
        return float(np.sum(out * r))

    _, cache = relu_forward(x)
    return _worst(value, [(x, relu_backward(r, cache))], h)


def _maxpool_case(rng, h):
    # A scaled permutation keeps window elements well separated, so no
    # perturbation can flip an argmax.
    x = 0.1 * rng.permutation(np.arange(2 * 3 * 6 * 6, dtype=np.float64))
    x = x.reshape(2, 3, 6, 6)
    out, cache = maxpool2d_forward(x)
    r = rng.standard_normal(out.shape)

    def value():
        out, _ = maxpool2d_forward(x)
        return float(np.sum(out * r))

    return _worst(value, [(x, maxpool2d_backward(r, cache))], h)


def _fc_case(rng, h):
    x = rng.standard_normal((3, 7))
    w = 0.5 * rng.standard_normal((4, 7))
    b = rng.standard_normal(4)
    r = rng.standard_normal((3, 4))

    def value():
        out, _ = fc_forward(x, w, b)
        return float(np.sum(out * r))

    _, cache = fc_forward(x, w, b)
    gx, gw, gb = fc_backward(r, cache, w)
    return _worst(value, [(x, gx), (w, gw), (b, gb)], h)


def _loss_case(rng, h):
    pred = rng.standard_normal((4, 6))
    target = rng.standard_normal((4, 6))

    def value():
        loss, _ = half_mse_loss(pred, target)
        return loss

    _, grad = half_mse_loss(pred, target)
    return _worst(value, [(pred, grad)], h)


def _lstm_step_case(rng, h):
    n, d, hid = 3, 4, 5
    x = rng.standard_normal((n, d))
    h_prev = rng.standard_normal((n, hid))
    c_prev = rng.standard_normal((n, hid))
    w_x = 0.5 * rng.standard_normal((4 * hid, d))
    w_h = 0.5 * rng.standard_normal((4 * hid, hid))
    b = 0.5 * rng.standard_normal(4 * hid)
    r_h = rng.standard_normal((n, hid))
    r_c = rng.standard_normal((n, hid))

    def value():
        h_out, c_out, _ = lstm_step_forward(x, h_prev, c_prev, w_x, w_h, b)
        return float(np.sum(h_out * r_h) + np.sum(c_out * r_c))

    _, _, cache = lstm_step_forward(x, h_prev, c_prev, w_x, w_h, b)
    gx, gh, gc, gwx, gwh, gb = lstm_step_backward(r_h, r_c, cache)
    return _worst(value, [(x, gx), (h_prev, gh), (c_prev, gc),
                          (w_x, gwx), (w_h, gwh), (b, gb)], h)


def _lstm_bptt_case(rng, h):
    t_steps, n, d, hid = 3, 2, 4, 5
    xs = rng.standard_normal((t_steps, n, d))
    w_x = 0.5 * rng.standard_normal((4 * hid, d))
    w_h = 0.5 * rng.standard_normal((4 * hid, hid))
    b = 0.5 * rng.standard_normal(4 * hid)
    r = rng.standard_normal((t_steps, n, hid))

    def value():
        hs, _ = lstm_forward(xs, w_x, w_h, b)
        return float(np.sum(hs * r))

    _, caches = lstm_forward(xs, w_x, w_h, b)
    gxs, gwx, gwh, gb = lstm_backward(r, caches)
    return _worst(value, [(xs, gxs), (w_x, gwx), (w_h, gwh), (b, gb)], h)


def gradcheck_battery(seed: int = 0, h: float = DEFAULT_STEP) -> dict:
    """Run every layer's finite-difference check; returns name -> max error."""
    rng = np.random.default_rng(seed)
    return {
        "conv2d": _conv_case(rng, stride=1, pad=1, h=h),
        "conv2d_strided": _conv_case(rng, stride=2, pad=0, h=h),
        "relu": _relu_case(rng, h),
        "maxpool2d": _maxpool_case(rng, h),
        "fc": _fc_case(rng, h),
        "half_mse": _loss_case(rng, h),
        "lstm_step": _lstm_step_case(rng, h),
        "lstm_bptt": _lstm_bptt_case(rng, h),
    }
