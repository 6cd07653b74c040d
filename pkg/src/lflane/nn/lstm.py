"""A single-layer LSTM with full backpropagation through time.

Gate layout follows the common packed convention: the four gate blocks are
stacked as [input, forget, cell, output] along the first axis of the weight
matrices, so w_x is (4H, D), w_h is (4H, H), and b is (4H,). Input, forget,
and output gates are sigmoids; the cell candidate is a tanh.
"""

import numpy as np


def _sigmoid(z):
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def lstm_step_forward(x, h_prev, c_prev, w_x, w_h, b):
    """One time step: x (N, D), h_prev/c_prev (N, H) -> (h, c, cache)."""
    hidden = h_prev.shape[1]
    z = x @ w_x.T + h_prev @ w_h.T + b
    gi = _sigmoid(z[:, 0 * hidden:1 * hidden])
    gf = _sigmoid(z[:, 1 * hidden:2 * hidden])
    gg = np.tanh(z[:, 2 * hidden:3 * hidden])
    go = _sigmoid(z[:, 3 * hidden:4 * hidden])
    c = gf * c_prev + gi * gg
    tc = np.tanh(c)
    h = go * tc
    cache = (x, h_prev, c_prev, w_x, w_h, gi, gf, gg, go, tc)
    return h, c, cache


def lstm_step_backward(grad_h, grad_c, cache):
    """Backward for one step.

    grad_h and grad_c are the gradients arriving at this step's h and c.
    Returns (grad_x, grad_h_prev, grad_c_prev, grad_w_x, grad_w_h, grad_b).
    """
    x, h_prev, c_prev, w_x, w_h, gi, gf, gg, go, tc = cache
    dc = grad_c + grad_h * go * (1.0 - tc * tc)
    d_gi = dc * gg * gi * (1.0 - gi)
    d_gf = dc * c_prev * gf * (1.0 - gf)
    d_gg = dc * gi * (1.0 - gg * gg)
    d_go = grad_h * tc * go * (1.0 - go)
    dz = np.concatenate([d_gi, d_gf, d_gg, d_go], axis=1)

    grad_x = dz @ w_x
    grad_h_prev = dz @ w_h
    grad_c_prev = dc * gf
    grad_w_x = dz.T @ x
    grad_w_h = dz.T @ h_prev
    grad_b = dz.sum(axis=0)
    return grad_x, grad_h_prev, grad_c_prev, grad_w_x, grad_w_h, grad_b


def lstm_forward(xs, w_x, w_h, b, h0=None, c0=None):
    """Run the cell over xs (T, N, D); returns (hs (T, N, H), caches)."""
    t_steps, n, _ = xs.shape
    hidden = w_h.shape[1]
    h = np.zeros((n, hidden)) if h0 is None else h0
    c = np.zeros((n, hidden)) if c0 is None else c0
    hs = np.empty((t_steps, n, hidden))
    caches = []
    for t in range(t_steps):
        h, c, cache = lstm_step_forward(xs[t], h, c, w_x, w_h, b)
        hs[t] = h
        caches.append(cache)
    return hs, caches


def lstm_backward(grad_hs, caches):
    """Backpropagate through time.

    grad_hs (T, N, H) holds the gradient flowing into each step's hidden
    state from outside the recurrence (zeros for unsupervised steps).
    Returns (grad_xs, grad_w_x, grad_w_h, grad_b).
    """
    t_steps = len(caches)
    x0, h0, _, w_x, w_h = caches[0][:5]
    grad_xs = np.empty((t_steps, *x0.shape))
    grad_w_x = np.zeros_like(w_x)
    grad_w_h = np.zeros_like(w_h)
    grad_b = np.zeros(w_x.shape[0])
    grad_h = np.zeros_like(h0)
    grad_c = np.zeros_like(h0)
    for t in range(t_steps - 1, -1, -1):
        gx, grad_h, grad_c, gwx, gwh, gb = lstm_step_backward(
            grad_hs[t] + grad_h, grad_c, caches[t])
        grad_xs[t] = gx
        grad_w_x += gwx
        grad_w_h += gwh
        grad_b += gb
    return grad_xs, grad_w_x, grad_w_h, grad_b
