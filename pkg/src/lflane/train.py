"""Mini-batch Adam training with a fixed, fully seeded update order.

Runs are bit-reproducible: parameter init and the per-epoch sample shuffle
both descend from TrainConfig.seed, batches walk the permutation in order,
and frames inside a temporal batch are never reordered. Each epoch appends
one row to history.csv (epoch, lr, train_loss, val_loss) and atomically
rewrites checkpoint.ckpt, so a killed run leaves a consistent file pair.

Batch size counts samples: frames for the single-frame modalities,
sequences for lf_temporal.
"""

import csv
import json
import os
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import NumericalError, ValidationError
from .model import (
    ModelConfig,
    init_params,
    model_backward,
    model_forward,
    save_checkpoint,
)
from .nn.layers import half_mse_loss
from .nn.optim import LrSchedule, adam_init, adam_step, lr_at_epoch

DEFAULT_BATCH_SIZE = {"regular2d": 16, "lf_single": 16, "lf_temporal": 4}


@dataclass(frozen=True)
class TrainConfig:
    modality: str
    epochs: int = 12
    batch_size: int = 0  # 0 picks the per-modality default
    seed: int = 0
    base_lr: float = 3e-4
    lr_decay: float = 0.1
    lr_decay_every: int = 20
    macro_size: int = 2
    feature_dim: int = 64
    lstm_hidden: int = 64

    def __post_init__(self):
        if self.modality not in DEFAULT_BATCH_SIZE:
            raise ValidationError(f"unknown modality {self.modality!r}")
        if self.epochs < 1:
            raise ValidationError("epochs must be at least 1")
        if self.batch_size < 0:
            raise ValidationError("batch_size must be non-negative")

    @property
    def resolved_batch_size(self) -> int:
        return self.batch_size or DEFAULT_BATCH_SIZE[self.modality]


@dataclass
class TrainResult:
    params: dict
    model_config: ModelConfig
    history: list = field(default_factory=list)
    checkpoint_path: str = None
    history_path: str = None

    @property
    def final_train_loss(self) -> float:
        return self.history[-1]["train_loss"]


def model_config_for(x: np.ndarray, config: TrainConfig) -> ModelConfig:
    """Derive the network geometry from a batch array's shape."""
    if config.modality == "lf_temporal":
        if x.ndim != 5:
            raise ValidationError("lf_temporal training data must be 5-D")
        _, _, c, h, w = x.shape
    else:
        if x.ndim != 4:
            raise ValidationError("single-frame training data must be 4-D")
        _, c, h, w = x.shape
    return ModelConfig(modality=config.modality, in_height=h, in_width=w,
                       in_channels=c, feature_dim=config.feature_dim,
                       lstm_hidden=config.lstm_hidden)


def _take(x, idx, temporal: bool):
    return x[:, idx].astype(np.float64) if temporal else x[idx].astype(np.float64)


def batch_loss(params, model_config, x, y, batch: int = 64) -> float:
    """Half-MSE over a full array, evaluated in memory-bounded chunks."""
    temporal = model_config.modality == "lf_temporal"
    n = x.shape[1] if temporal else x.shape[0]
    total = 0.0
    for start in range(0, n, batch):
        idx = np.arange(start, min(start + batch, n))
        pred, _ = model_forward(params, model_config, _take(x, idx, temporal))
        loss, _ = half_mse_loss(pred, y[idx])
        total += loss * len(idx)
    return total / n


def predict_in_batches(params, model_config, x, batch: int = 64) -> np.ndarray:
    temporal = model_config.modality == "lf_temporal"
    n = x.shape[1] if temporal else x.shape[0]
    preds = []
    for start in range(0, n, batch):
        idx = np.arange(start, min(start + batch, n))
        pred, _ = model_forward(params, model_config, _take(x, idx, temporal))
        preds.append(pred)
    return np.concatenate(preds)


def train_model(x_train, y_train, config: TrainConfig,
                x_val=None, y_val=None, out_dir=None) -> TrainResult:
    """Train one model; returns final parameters and the per-epoch history.

    x_val/y_val are optional; without them the val_loss column is empty.
    With out_dir set, history.csv, checkpoint.ckpt, and config.json are
    written there (the checkpoint is refreshed every epoch).
    """
    mc = model_config_for(np.asarray(x_train), config)
    temporal = config.modality == "lf_temporal"
    n = x_train.shape[1] if temporal else x_train.shape[0]
    if y_train.shape[0] != n:
        raise ValidationError(f"{n} samples but {y_train.shape[0]} labels")
    y_train = np.asarray(y_train, dtype=np.float64)

    params = init_params(mc, seed=config.seed)
    adam = adam_init(params)
    schedule = LrSchedule(config.base_lr, config.lr_decay, config.lr_decay_every)
    shuffle_rng = np.random.default_rng([config.seed, 1])
    bs = config.resolved_batch_size

    history_path = checkpoint_path = None
    csv_file = writer = None
    if out_dir is not None:
        os.makedirs(out_dir, exist_ok=True)
        history_path = os.path.join(out_dir, "history.csv")
        checkpoint_path = os.path.join(out_dir, "checkpoint.ckpt")
        with open(os.path.join(out_dir, "config.json"), "w") as fh:
            json.dump({"train": asdict(config), "model": asdict(mc)},
                      fh, sort_keys=True, indent=2)
            fh.write("\n")
        csv_file = open(history_path, "w", newline="")
        writer = csv.writer(csv_file)
        writer.writerow(["epoch", "lr", "train_loss", "val_loss"])

    history = []
    try:
        for epoch in range(config.epochs):
            lr = lr_at_epoch(schedule, epoch)
            perm = shuffle_rng.permutation(n)
            total = 0.0
            for start in range(0, n, bs):
                idx = perm[start:start + bs]
                pred, cache = model_forward(params, mc, _take(x_train, idx, temporal))
                loss, grad = half_mse_loss(pred, y_train[idx])
                if not np.isfinite(loss):
                    raise NumericalError(
                        f"non-finite training loss at epoch {epoch}")
                grads = model_backward(params, mc, cache, grad)
                params, adam = adam_step(params, grads, adam, lr)
                total += loss * len(idx)
            train_loss = total / n
            val_loss = None
            if x_val is not None:
                val_loss = batch_loss(params, mc, x_val, y_val)
                if not np.isfinite(val_loss):
                    raise NumericalError(
                        f"non-finite validation loss at epoch {epoch}")
            row = {"epoch": epoch, "lr": lr,
                   "train_loss": train_loss, "val_loss": val_loss}
            history.append(row)
            if writer is not None:
                writer.writerow([epoch, f"{lr:.17g}", f"{train_loss:.17g}",
                                 "" if val_loss is None else f"{val_loss:.17g}"])
                csv_file.flush()
            if checkpoint_path is not None:
                save_checkpoint(
                    checkpoint_path, params, mc, adam=adam,
                    rng_state=shuffle_rng.bit_generator.state,
                    meta={"epoch": epoch, "train_config": asdict(config)},
                )
    finally:
        if csv_file is not None:
            csv_file.close()

    return TrainResult(params=params, model_config=mc, history=history,
                       checkpoint_path=checkpoint_path, history_path=history_path)
