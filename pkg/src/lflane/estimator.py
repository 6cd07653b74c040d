"""scikit-learn style wrapper around the lane-regression training loop.

LaneRegressor accepts either ready-made arrays (channels-first, sample
axis leading) or lists of LightField / LightFieldSequence objects, which it
converts with the same loader rules the pipeline uses. Hyperparameters are
stored verbatim so get_params/set_params/clone behave as sklearn expects.
"""

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.exceptions import NotFittedError

from .errors import ValidationError
from .labels import LABEL_SIZE
from .lightfield import LightField, LightFieldSequence
from .loader import frame_to_input
from .train import TrainConfig, predict_in_batches, train_model


class LaneRegressor(RegressorMixin, BaseEstimator):
    """Lane-coordinate regressor over one input modality.

    Parameters mirror TrainConfig; fit(X, y) trains from scratch and stores
    the learned tensors on ``params_``. X may be:

    * regular2d / lf_single: an (N, C, H, W) array, or a list of LightField
      objects (converted per the modality);
    * lf_temporal: an (N, T, C, H, W) array, or a list of
      LightFieldSequence objects with equal frame counts.

    y is (N, 20): five (x, y) pairs per lane boundary, near to far.
    """

    def __init__(self, modality="lf_single", epochs=12, batch_size=0,
                 base_lr=3e-4, lr_decay=0.1, lr_decay_every=20, macro_size=2,
                 feature_dim=64, lstm_hidden=64, seed=0):
        self.modality = modality
        self.epochs = epochs
        self.batch_size = batch_size
        self.base_lr = base_lr
        self.lr_decay = lr_decay
        self.lr_decay_every = lr_decay_every
        self.macro_size = macro_size
        self.feature_dim = feature_dim
        self.lstm_hidden = lstm_hidden
        self.seed = seed

    def _train_config(self) -> TrainConfig:
        return TrainConfig(
            modality=self.modality, epochs=self.epochs,
            batch_size=self.batch_size, seed=self.seed, base_lr=self.base_lr,
            lr_decay=self.lr_decay, lr_decay_every=self.lr_decay_every,
            macro_size=self.macro_size, feature_dim=self.feature_dim,
            lstm_hidden=self.lstm_hidden,
        )

    def _to_batch(self, X) -> np.ndarray:
        temporal = self.modality == "lf_temporal"
        if isinstance(X, (list, tuple)):
            if not X:
                raise ValidationError("X must not be empty")
            if temporal:
                if not all(isinstance(s, LightFieldSequence) for s in X):
                    raise ValidationError(
                        "lf_temporal expects LightFieldSequence inputs")
                stacks = [
                    np.stack([frame_to_input(f, "lf_single", self.macro_size)
                              for f in seq.frames])
                    for seq in X
                ]
                if len({s.shape for s in stacks}) != 1:
                    raise ValidationError("sequences differ in shape")
                X = np.stack(stacks)
            else:
                if not all(isinstance(f, LightField) for f in X):
                    raise ValidationError(
                        f"{self.modality} expects LightField inputs")
                X = np.stack([frame_to_input(f, self.modality, self.macro_size)
                              for f in X])
        X = np.asarray(X, dtype=np.float64)
        expected = 5 if temporal else 4
        if X.ndim != expected:
            raise ValidationError(
                f"{self.modality} expects a {expected}-D array, got {X.ndim}-D")
        if temporal:
            # sample-major in, time-major out
            X = X.transpose(1, 0, 2, 3, 4)
        return X

    @staticmethod
    def _to_targets(y, n: int) -> np.ndarray:
        y = np.asarray(y, dtype=np.float64)
        if y.shape != (n, LABEL_SIZE):
            raise ValidationError(
                f"y must have shape ({n}, {LABEL_SIZE}), got {y.shape}")
        if not np.all(np.isfinite(y)):
            raise ValidationError("y contains non-finite values")
        return y

    def fit(self, X, y):
        x = self._to_batch(X)
        n = x.shape[1] if self.modality == "lf_temporal" else x.shape[0]
        targets = self._to_targets(y, n)
        result = train_model(x, targets, self._train_config())
        self.params_ = result.params
        self.model_config_ = result.model_config
        self.history_ = result.history
        return self

    def predict(self, X) -> np.ndarray:
        if not hasattr(self, "params_"):
            raise NotFittedError("this LaneRegressor has not been fitted")
        return predict_in_batches(self.params_, self.model_config_,
                                  self._to_batch(X))
