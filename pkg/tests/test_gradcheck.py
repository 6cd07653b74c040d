import numpy as np
import pytest

from lflane import NumericalError, gradcheck_model
from lflane.nn import (
    gradcheck_battery,
    max_relative_error,
    numerical_gradient,
)

TOLERANCE = 1e-4


class TestPrimitives:
    def test_numerical_gradient_on_quadratic(self):
        x = np.array([1.0, -2.0, 3.0])
        a = np.array([2.0, 0.5, -1.0])

        def f():
            return float(np.sum(a * x * x))

        grad = numerical_gradient(f, x)
        assert np.allclose(grad, 2 * a * x, atol=1e-8)

    def test_numerical_gradient_restores_input(self):
        x = np.array([0.5, 1.5])
        snapshot = x.copy()
        numerical_gradient(lambda: float(x.sum()), x)
        assert np.array_equal(x, snapshot)

    def test_relative_error_scales(self):
        assert max_relative_error([1.0], [1.0]) == 0.0
        assert max_relative_error([2.0], [1.0]) == pytest.approx(0.5)
        # floor keeps tiny absolute noise from dominating
        assert max_relative_error([1e-9], [0.0]) == pytest.approx(1e-5)

    def test_relative_error_empty(self):
        assert max_relative_error([], []) == 0.0


class TestBattery:
    @pytest.mark.parametrize("seed", [1, 2, 3])
    def test_all_layers_pass(self, seed):
        errors = gradcheck_battery(seed=seed)
        assert set(errors) == {
            "conv2d", "conv2d_strided", "relu", "maxpool2d",
            "fc", "half_mse", "lstm_step", "lstm_bptt",
        }
        for name, err in errors.items():
            assert err < TOLERANCE, f"{name}: {err:.3g}"

    def test_deterministic(self):
        assert gradcheck_battery(seed=5) == gradcheck_battery(seed=5)


class TestComposedModel:
    @pytest.mark.parametrize("modality", ["lf_single", "lf_temporal"])
    def test_full_model_passes(self, modality):
        errors = gradcheck_model(seed=1, modality=modality)
        for name, err in errors.items():
            assert err < TOLERANCE, f"{name}: {err:.3g}"

    def test_temporal_covers_lstm_params(self):
        errors = gradcheck_model(seed=2, modality="lf_temporal")
        assert {"lstm_wx", "lstm_wh", "lstm_b"} <= set(errors)

    def test_detects_a_broken_gradient(self, monkeypatch):
        # Sabotage one backward pass; the checker must notice.
        import lflane.model as model_mod

        real = model_mod.fc_backward

        def wrong(grad_out, cache, w):
            gx, gw, gb = real(grad_out, cache, w)
            return gx, 1.02 * gw, gb

        monkeypatch.setattr(model_mod, "fc_backward", wrong)
        errors = gradcheck_model(seed=1, modality="lf_single")
        assert max(errors.values()) > TOLERANCE
