import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from lflane import (
    LaneRegressor,
    LightField,
    LightFieldSequence,
    ValidationError,
    lenslet_transform,
)


def fields(rng, n, a=3, size=16):
    return [LightField(rng.uniform(0, 1, (a, a, size, size, 1))
                       .astype(np.float32)) for _ in range(n)]


def targets(rng, n):
    return rng.uniform(0.0, 1.0, (n, 20))


class TestSklearnProtocol:
    def test_get_params_round_trip(self):
        est = LaneRegressor(modality="regular2d", epochs=3, seed=9)
        params = est.get_params()
        assert params["modality"] == "regular2d"
        assert params["epochs"] == 3
        rebuilt = LaneRegressor(**params)
        assert rebuilt.get_params() == params

    def test_set_params_and_clone(self):
        est = LaneRegressor().set_params(epochs=2, modality="lf_temporal")
        twin = clone(est)
        assert twin.get_params() == est.get_params()
        assert twin is not est

    def test_clone_drops_fitted_state(self, rng):
        est = LaneRegressor(modality="regular2d", epochs=1)
        est.fit(rng.uniform(0, 1, (4, 1, 16, 16)), targets(rng, 4))
        assert hasattr(est, "params_")
        assert not hasattr(clone(est), "params_")


class TestFitPredict:
    def test_array_inputs(self, rng):
        x = rng.uniform(0, 1, (6, 1, 16, 16))
        est = LaneRegressor(modality="regular2d", epochs=2, seed=1)
        assert est.fit(x, targets(rng, 6)) is est
        pred = est.predict(x)
        assert pred.shape == (6, 20)
        assert np.all(np.isfinite(pred))

    def test_lightfield_inputs_match_manual_conversion(self, rng):
        lfs = fields(rng, 5)
        y = targets(rng, 5)
        est = LaneRegressor(modality="lf_single", epochs=2, seed=0,
                            macro_size=2).fit(lfs, y)
        manual = np.stack([
            lenslet_transform(lf, macro_size=2).pixels.transpose(2, 0, 1)
            for lf in lfs
        ])
        assert np.allclose(est.predict(lfs), est.predict(manual))

    def test_temporal_sequences(self, rng):
        seqs = [LightFieldSequence(frames=fields(rng, 3))
                for _ in range(4)]
        y = targets(rng, 4)
        est = LaneRegressor(modality="lf_temporal", epochs=2, batch_size=2,
                            seed=0).fit(seqs, y)
        assert est.predict(seqs).shape == (4, 20)

    def test_temporal_array_is_sample_major(self, rng):
        x = rng.uniform(0, 1, (4, 3, 1, 16, 16))  # (N, T, C, H, W)
        est = LaneRegressor(modality="lf_temporal", epochs=1, batch_size=2)
        est.fit(x, targets(rng, 4))
        assert est.predict(x).shape == (4, 20)

    def test_same_seed_reproducible(self, rng):
        x = rng.uniform(0, 1, (4, 1, 16, 16))
        y = targets(rng, 4)
        a = LaneRegressor(modality="regular2d", epochs=2, seed=7).fit(x, y)
        b = LaneRegressor(modality="regular2d", epochs=2, seed=7).fit(x, y)
        assert np.array_equal(a.predict(x), b.predict(x))


class TestValidation:
    def test_predict_before_fit(self, rng):
        with pytest.raises(NotFittedError):
            LaneRegressor().predict(rng.uniform(0, 1, (2, 1, 16, 16)))

    def test_wrong_rank_rejected(self, rng):
        est = LaneRegressor(modality="regular2d", epochs=1)
        with pytest.raises(ValidationError):
            est.fit(rng.uniform(0, 1, (4, 3, 1, 16, 16)), targets(rng, 4))

    def test_wrong_input_kind_rejected(self, rng):
        est = LaneRegressor(modality="lf_temporal", epochs=1)
        with pytest.raises(ValidationError):
            est.fit(fields(rng, 3), targets(rng, 3))  # fields, not sequences

    def test_bad_targets_rejected(self, rng):
        x = rng.uniform(0, 1, (3, 1, 16, 16))
        est = LaneRegressor(modality="regular2d", epochs=1)
        with pytest.raises(ValidationError):
            est.fit(x, np.zeros((3, 19)))
        bad = targets(rng, 3)
        bad[1, 4] = np.nan
        with pytest.raises(ValidationError):
            est.fit(x, bad)

    def test_empty_list_rejected(self, rng):
        with pytest.raises(ValidationError):
            LaneRegressor(modality="lf_single", epochs=1).fit(
                [], targets(rng, 0))
