"""Convolution, pooling, activation, linear, and loss primitives.

Array layout is channels-first: images are (N, C, H, W). Convolutions are
computed as k*k shifted tensor contractions (one BLAS call per kernel tap),
which is exact and far faster than an explicit loop over output pixels.
"""

import numpy as np

from ..errors import ValidationError


def conv2d_forward(x, w, b, stride: int = 1, pad: int = 0):
    """Cross-correlate x (N, C, H, W) with w (F, C, k, k) plus bias b (F,).

    Output is (N, F, H_out, W_out) with H_out = (H + 2*pad - k)//stride + 1.
    """
    n, c, h, width = x.shape
    f, cw, kh, kw = w.shape
    if cw != c:
        raise ValidationError(f"kernel expects {cw} channels, input has {c}")
    if h + 2 * pad < kh or width + 2 * pad < kw:
        raise ValidationError("kernel larger than padded input")
    h_out = (h + 2 * pad - kh) // stride + 1
    w_out = (width + 2 * pad - kw) // stride + 1

    xp = np.pad(x, ((0, 0), (0, 0), (pad, pad), (pad, pad))) if pad else x
    out = np.tile(b[None, :, None, None], (n, 1, h_out, w_out))
    for ki in range(kh):
        for kj in range(kw):
            xs = xp[:, :, ki:ki + stride * h_out:stride,
                    kj:kj + stride * w_out:stride]
            # (F, C) x (N, C, Ho, Wo) -> (F, N, Ho, Wo)
            out += np.tensordot(w[:, :, ki, kj], xs,
                                axes=([1], [1])).transpose(1, 0, 2, 3)
    cache = (xp, x.shape, w, stride, pad)
    return out, cache


def conv2d_backward(grad_out, cache):
    """Gradients of conv2d_forward; returns (grad_x, grad_w, grad_b)."""
    xp, x_shape, w, stride, pad = cache
    f, c, kh, kw = w.shape
    h_out, w_out = grad_out.shape[2:]

    grad_b = grad_out.sum(axis=(0, 2, 3))
    grad_w = np.zeros_like(w)
    grad_xp = np.zeros_like(xp)
    for ki in range(kh):
        for kj in range(kw):
            sl_i = slice(ki, ki + stride * h_out, stride)
            sl_j = slice(kj, kj + stride * w_out, stride)
            xs = xp[:, :, sl_i, sl_j]
            grad_w[:, :, ki, kj] = np.tensordot(
                grad_out, xs, axes=([0, 2, 3], [0, 2, 3]))
            # (N, F, Ho, Wo) x (F, C) -> (N, Ho, Wo, C)
            grad_xp[:, :, sl_i, sl_j] += np.tensordot(
                grad_out, w[:, :, ki, kj], axes=([1], [0])).transpose(0, 3, 1, 2)
    if pad:
        grad_x = grad_xp[:, :, pad:pad + x_shape[2], pad:pad + x_shape[3]]
    else:
        grad_x = grad_xp
    return grad_x, grad_w, grad_b


def relu_forward(x):
    # The cache is the input itself; backward recomputes the active mask.
    return np.maximum(x, 0.0), x


def relu_backward(grad_out, cache):
    return grad_out * (cache > 0)


def maxpool2d_forward(x):
    """2x2 max pooling with stride 2; trailing odd rows/columns are dropped.

    Ties pick the first maximum in row-major window order, consistently in
    forward and backward.
    """
    n, c, h, w = x.shape
    h_out, w_out = h // 2, w // 2
    if h_out == 0 or w_out == 0:
        raise ValidationError(f"input {h}x{w} too small for 2x2 pooling")
    xc = x[:, :, :2 * h_out, :2 * w_out]
    cands = np.stack([
        xc[:, :, 0::2, 0::2], xc[:, :, 0::2, 1::2],
        xc[:, :, 1::2, 0::2], xc[:, :, 1::2, 1::2],
    ])
    best = np.argmax(cands, axis=0)
    out = np.take_along_axis(cands, best[None], axis=0)[0]
    cache = (x.shape, best)
    return out, cache


def maxpool2d_backward(grad_out, cache):
    x_shape, best = cache
    grad_x = np.zeros(x_shape, dtype=grad_out.dtype)
    h_out, w_out = grad_out.shape[2:]
    xc = grad_x[:, :, :2 * h_out, :2 * w_out]
    for k, (di, dj) in enumerate(((0, 0), (0, 1), (1, 0), (1, 1))):
        xc[:, :, di::2, dj::2] += grad_out * (best == k)
    return grad_x


def fc_forward(x, w, b):
    """Affine map: x (N, D) with w (F, D), b (F,) -> (N, F)."""
    return x @ w.T + b, x


def fc_backward(grad_out, cache, w):
    x = cache
    grad_w = grad_out.T @ x
    grad_b = grad_out.sum(axis=0)
    grad_x = grad_out @ w
    return grad_x, grad_w, grad_b


def half_mse_loss(pred, target):
    """Half mean squared error over the batch: (1/2N) * sum |pred - target|^2.

    Returns (loss, grad_pred) with grad_pred = (pred - target) / N.
    """
    if pred.shape != target.shape:
        raise ValidationError(
            f"prediction shape {pred.shape} != target shape {target.shape}")
    n = pred.shape[0]
    diff = pred - target
    loss = 0.5 * float(np.sum(diff * diff)) / n
    return loss, diff / n
