"""The lane-regression network for all three input modalities.

Shared backbone: three conv(3x3, pad 1) + relu + maxpool stages with 8, 16,
and 32 filters, then flatten and a relu feature projection. Heads:

* ``regular2d``   backbone on a single 2D view -> linear head.
* ``lf_single``   identical network, fed an interleaved lenslet image of the
                  same size, so parameter counts match regular2d exactly.
* ``lf_temporal`` backbone per frame -> LSTM over time -> linear head on the
                  final hidden state.

Parameters are float64 dicts. Initialization is He-style uniform
(limit = sqrt(6 / fan_in)) with a fixed draw order, zero biases, and the
LSTM forget-gate bias at 1. Checkpoints are a single file: a JSON header
line describing tensor order and optimizer/rng state, then one
little-endian float64 blob.
"""

import json
import os
from dataclasses import asdict, dataclass

import numpy as np

from .errors import NumericalError, ValidationError
from .labels import LABEL_SIZE
from .nn.gradcheck import ERROR_FLOOR, max_relative_error
from .nn.layers import (
    conv2d_backward,
    conv2d_forward,
    fc_backward,
    fc_forward,
    maxpool2d_backward,
    maxpool2d_forward,
    relu_backward,
    relu_forward,
)
from .nn.lstm import lstm_backward, lstm_forward
from .nn.optim import AdamState

MODALITIES = ("regular2d", "lf_single", "lf_temporal")
CONV_CHANNELS = (8, 16, 32)
KERNEL = 3

CHECKPOINT_FORMAT = "lane-checkpoint"
CHECKPOINT_VERSION = 1


@dataclass(frozen=True)
class ModelConfig:
    """Input geometry and layer widths; fully determines parameter shapes."""

    modality: str
    in_height: int
    in_width: int
    in_channels: int = 1
    feature_dim: int = 64
    lstm_hidden: int = 64
    out_dim: int = LABEL_SIZE

    def __post_init__(self):
        if self.modality not in MODALITIES:
            raise ValidationError(
                f"modality must be one of {MODALITIES}, got {self.modality!r}")
        if min(self.in_height, self.in_width) < 8:
            raise ValidationError("inputs must be at least 8x8 for three pools")
        if min(self.feature_dim, self.lstm_hidden, self.out_dim) < 1:
            raise ValidationError("layer widths must be positive")


def feature_map_shape(config: ModelConfig):
    """(C, H, W) after the three conv/pool stages."""
    h, w = config.in_height, config.in_width
    for _ in CONV_CHANNELS:
        h, w = h // 2, w // 2
    return CONV_CHANNELS[-1], h, w


def param_shapes(config: ModelConfig) -> dict:
    """Tensor shapes in their canonical (draw and serialization) order."""
    c_in = config.in_channels
    shapes = {}
    for i, c_out in enumerate(CONV_CHANNELS, start=1):
        shapes[f"conv{i}_w"] = (c_out, c_in, KERNEL, KERNEL)
        shapes[f"conv{i}_b"] = (c_out,)
        c_in = c_out
    flat = int(np.prod(feature_map_shape(config)))
    shapes["fc_w"] = (config.feature_dim, flat)
    shapes["fc_b"] = (config.feature_dim,)
    head_in = (config.lstm_hidden if config.modality == "lf_temporal"
               else config.feature_dim)
    if config.modality == "lf_temporal":
        shapes["lstm_wx"] = (4 * config.lstm_hidden, config.feature_dim)
        shapes["lstm_wh"] = (4 * config.lstm_hidden, config.lstm_hidden)
        shapes["lstm_b"] = (4 * config.lstm_hidden,)
    shapes["head_w"] = (config.out_dim, head_in)
    shapes["head_b"] = (config.out_dim,)
    return shapes


def init_params(config: ModelConfig, seed: int = 0) -> dict:
    """Seeded He-uniform weights, zero biases, LSTM forget bias 1."""
    rng = np.random.default_rng(seed)
    params = {}
    for name, shape in param_shapes(config).items():
        if name.endswith("_b"):
            params[name] = np.zeros(shape)
        else:
            if name.startswith("conv"):
                fan_in = int(np.prod(shape[1:]))
            elif name == "lstm_wx":
                fan_in = config.feature_dim + config.lstm_hidden
            elif name == "lstm_wh":
                fan_in = config.feature_dim + config.lstm_hidden
            else:
                fan_in = shape[1]
            limit = np.sqrt(6.0 / fan_in)
            params[name] = rng.uniform(-limit, limit, size=shape)
    if config.modality == "lf_temporal":
        params["lstm_b"][config.lstm_hidden:2 * config.lstm_hidden] = 1.0
    return params


def count_params(params: dict) -> int:
    return int(sum(p.size for p in params.values()))


def _backbone_forward(params, x):
    caches = []
    out = x
    for i in range(1, len(CONV_CHANNELS) + 1):
        out, c_cache = conv2d_forward(out, params[f"conv{i}_w"],
                                      params[f"conv{i}_b"], stride=1, pad=1)
        out, r_cache = relu_forward(out)
        out, p_cache = maxpool2d_forward(out)
        caches.append((c_cache, r_cache, p_cache))
    conv_shape = out.shape
    flat = out.reshape(out.shape[0], -1)
    feats, fc_cache = fc_forward(flat, params["fc_w"], params["fc_b"])
    feats, f_cache = relu_forward(feats)
    return feats, (caches, conv_shape, fc_cache, f_cache)


def _backbone_backward(params, grad_feats, cache):
    caches, conv_shape, fc_cache, f_cache = cache
    grads = {}
    g = relu_backward(grad_feats, f_cache)
    g, grads["fc_w"], grads["fc_b"] = fc_backward(g, fc_cache, params["fc_w"])
    g = g.reshape(conv_shape)
    for i in range(len(CONV_CHANNELS), 0, -1):
        c_cache, r_cache, p_cache = caches[i - 1]
        g = maxpool2d_backward(g, p_cache)
        g = relu_backward(g, r_cache)
        g, grads[f"conv{i}_w"], grads[f"conv{i}_b"] = conv2d_backward(g, c_cache)
    return grads


def model_forward(params: dict, config: ModelConfig, x: np.ndarray):
    """Predict labels for a batch.

    x is (N, C, H, W) for regular2d / lf_single, or (T, N, C, H, W) for
    lf_temporal. Returns (pred (N, out_dim), cache).
    """
    x = np.asarray(x, dtype=np.float64)
    if config.modality == "lf_temporal":
        if x.ndim != 5:
            raise ValidationError("lf_temporal expects a (T, N, C, H, W) batch")
        t_steps, n = x.shape[:2]
        feats = np.empty((t_steps, n, config.feature_dim))
        bb_caches = []
        for t in range(t_steps):
            feats[t], cache = _backbone_forward(params, x[t])
            bb_caches.append(cache)
        hs, lstm_caches = lstm_forward(feats, params["lstm_wx"],
                                       params["lstm_wh"], params["lstm_b"])
        pred, head_cache = fc_forward(hs[-1], params["head_w"], params["head_b"])
        return pred, ("temporal", bb_caches, lstm_caches, head_cache, hs.shape)
    if x.ndim != 4:
        raise ValidationError(f"{config.modality} expects an (N, C, H, W) batch")
    feats, bb_cache = _backbone_forward(params, x)
    pred, head_cache = fc_forward(feats, params["head_w"], params["head_b"])
    return pred, ("single", bb_cache, head_cache)


def model_backward(params: dict, config: ModelConfig, cache, grad_pred):
    """Parameter gradients for model_forward; supervision reaches the
    temporal head only through the final time step."""
    if cache[0] == "temporal":
        _, bb_caches, lstm_caches, head_cache, hs_shape = cache
        g_h, gw, gb = fc_backward(grad_pred, head_cache, params["head_w"])
        grads = {"head_w": gw, "head_b": gb}
        grad_hs = np.zeros(hs_shape)
        grad_hs[-1] = g_h
        grad_feats, grads["lstm_wx"], grads["lstm_wh"], grads["lstm_b"] = (
            lstm_backward(grad_hs, lstm_caches))
        for t in range(len(bb_caches)):
            step = _backbone_backward(params, grad_feats[t], bb_caches[t])
            for k, v in step.items():
                grads[k] = grads[k] + v if k in grads else v
        return grads
    _, bb_cache, head_cache = cache
    g, gw, gb = fc_backward(grad_pred, head_cache, params["head_w"])
    grads = _backbone_backward(params, g, bb_cache)
    grads["head_w"], grads["head_b"] = gw, gb
    return grads


def model_predict(params: dict, config: ModelConfig, x: np.ndarray) -> np.ndarray:
    pred, _ = model_forward(params, config, x)
    return pred


# ---------------------------------------------------------------------------
# Checkpoints
# ---------------------------------------------------------------------------


def save_checkpoint(path, params: dict, config: ModelConfig,
                    adam: AdamState = None, rng_state=None, meta: dict = None):
    """Atomically write one checkpoint file (JSON header + float64 blob).

    The blob holds every parameter tensor in canonical order, followed by the
    Adam m and v tensors in the same order when optimizer state is present.
    """
    names = list(param_shapes(config))
    if set(names) != set(params):
        raise ValidationError("params do not match the config's tensor set")
    header = {
        "format": CHECKPOINT_FORMAT,
        "version": CHECKPOINT_VERSION,
        "config": asdict(config),
        "tensors": [[n, list(params[n].shape)] for n in names],
        "adam_step": None if adam is None else adam.step,
        "rng_state": rng_state,
        "meta": meta or {},
    }
    chunks = [params[n] for n in names]
    if adam is not None:
        chunks += [adam.m[n] for n in names] + [adam.v[n] for n in names]
    blob = np.concatenate([c.reshape(-1) for c in chunks]).astype("<f8")

    tmp = f"{path}.tmp"
    with open(tmp, "wb") as fh:
        fh.write(json.dumps(header, sort_keys=True).encode())
        fh.write(b"\n")
        fh.write(blob.tobytes())
    os.replace(tmp, path)


def load_checkpoint(path):
    """Read a checkpoint; returns (params, config, adam, rng_state, meta)."""
    with open(path, "rb") as fh:
        header_line = fh.readline()
        raw = fh.read()
    try:
        header = json.loads(header_line)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"bad checkpoint header in {path}: {exc}") from exc
    if header.get("format") != CHECKPOINT_FORMAT:
        raise ValidationError(f"{path} is not a checkpoint file")
    config = ModelConfig(**header["config"])
    names = [n for n, _ in header["tensors"]]
    shapes = {n: tuple(s) for n, s in header["tensors"]}
    if names != list(param_shapes(config)):
        raise ValidationError("checkpoint tensor order does not match config")

    flat = np.frombuffer(raw, dtype="<f8")
    n_params = sum(int(np.prod(shapes[n])) for n in names)
    copies = 1 if header["adam_step"] is None else 3
    if flat.size != copies * n_params:
        raise ValidationError(
            f"checkpoint blob has {flat.size} values, expected {copies * n_params}")

    def take(offset):
        out = {}
        for n in names:
            size = int(np.prod(shapes[n]))
            out[n] = flat[offset:offset + size].reshape(shapes[n]).copy()
            offset += size
        return out, offset

    params, offset = take(0)
    adam = None
    if header["adam_step"] is not None:
        m, offset = take(offset)
        v, _ = take(offset)
        adam = AdamState(step=int(header["adam_step"]), m=m, v=v)
    return params, config, adam, header.get("rng_state"), header.get("meta", {})


# ---------------------------------------------------------------------------
# Composed-model gradient check
# ---------------------------------------------------------------------------


def _relu_inputs(cache):
    """Every relu pre-activation array hidden in a model_forward cache."""
    bb_caches = cache[1] if cache[0] == "temporal" else [cache[1]]
    for bb in bb_caches:
        stage_caches, _, _, f_cache = bb
        for _, r_cache, _ in stage_caches:
            yield r_cache
        yield f_cache


def gradcheck_model(seed: int = 0, modality: str = "lf_temporal",
                    h: float = 1e-5, checks_per_tensor: int = 30) -> dict:
    """Finite-difference check of the full forward/backward composition.

    Uses a small config and a random coordinate subset per tensor; returns
    {tensor name: max scaled relative error}.

    Central differences are blind at relu kinks, so the check point is
    redrawn until every pre-activation sits at least 20*h from zero; a step
    of h then cannot flip any activation (pre-activation slopes w.r.t. a
    single parameter stay well under 20 at this scale).
    """
    rng = np.random.default_rng(seed)
    config = ModelConfig(modality=modality, in_height=12, in_width=12,
                         in_channels=1, feature_dim=16, lstm_hidden=12,
                         out_dim=LABEL_SIZE)
    margin = 20.0 * h
    base = init_params(config, seed=seed)
    for attempt in range(200):
        params = {k: v + 0.05 * rng.standard_normal(v.shape)
                  for k, v in base.items()}
        if modality == "lf_temporal":
            x = rng.uniform(0.0, 1.0, (2, 2, 1, 12, 12))
        else:
            x = rng.uniform(0.0, 1.0, (3, 1, 12, 12))
        _, probe = model_forward(params, config, x)
        if min(np.min(np.abs(r)) for r in _relu_inputs(probe)) > margin:
            break
    else:
        raise NumericalError("could not find a kink-free gradcheck point")
    r = rng.standard_normal((x.shape[1] if modality == "lf_temporal"
                             else x.shape[0], LABEL_SIZE))

    def value():
        pred, _ = model_forward(params, config, x)
        return float(np.sum(pred * r))

    _, cache = model_forward(params, config, x)
    grads = model_backward(params, config, cache, r)

    errors = {}
    for name, p in params.items():
        k = min(checks_per_tensor, p.size)
        idx = rng.choice(p.size, size=k, replace=False)
        numeric = np.empty(k)
        flat = p.reshape(-1)
        for j, i in enumerate(idx):
            orig = flat[i]
            flat[i] = orig + h
            f_plus = value()
            flat[i] = orig - h
            f_minus = value()
            flat[i] = orig
            numeric[j] = (f_plus - f_minus) / (2.0 * h)
        errors[name] = max_relative_error(grads[name].reshape(-1)[idx], numeric,
                                          floor=ERROR_FLOOR)
    return errors
