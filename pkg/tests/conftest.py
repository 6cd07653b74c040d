import math

import numpy as np
import pytest

from lflane import CameraSpec, LightField, SceneSpec


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def random_lightfield(rng, angular=3, height=8, width=10, channels=1):
    views = rng.uniform(0.0, 1.0,
                        (angular, angular, height, width, channels))
    return LightField(views=views.astype(np.float32))


@pytest.fixture
def tiny_lf(rng):
    return random_lightfield(rng)


@pytest.fixture
def scene():
    return SceneSpec()


@pytest.fixture
def camera():
    return CameraSpec(focal_length=64.0)


# ---------------------------------------------------------------------------
# Sub-pixel probes shared by the geometry and acceptance tests
# ---------------------------------------------------------------------------


def ground_depth_at_row(cam, row, height, cam_y=None):
    """Invert the projection: camera depth z_cam of the ground at a pixel row.

    cam_y overrides the camera height (for off-center angular views).
    """
    h = cam.height_above_road if cam_y is None else cam_y
    k = (row - (height - 1) / 2.0) / cam.focal_length
    sin_p, cos_p = math.sin(cam.pitch), math.cos(cam.pitch)
    rel_z = h * (cos_p - k * sin_p) / (k * cos_p + sin_p)
    return h * sin_p + rel_z * cos_p, rel_z


def predicted_boundary_col(scene, cam, row, height, width,
                           side=-1.0, cam_x=0.0, cam_y=None):
    """Exact column of a lane boundary at an integer pixel row of one view."""
    z_cam, rel_z = ground_depth_at_row(cam, row, height, cam_y)
    x = 0.5 * scene.curvature * rel_z * rel_z + side * scene.lane_half_width
    return (width - 1) / 2.0 + cam.focal_length * (x - cam_x) / z_cam


def marking_centroid(view, row, col_hint, scene, window=6):
    """Measured sub-pixel marking position: intensity centroid around a hint."""
    vals = view[row, :, 0].astype(np.float64)
    lo = max(int(round(col_hint)) - window, 0)
    hi = min(int(round(col_hint)) + window + 1, vals.size)
    weights = np.clip(vals[lo:hi] - scene.surface_albedo, 0.0, None)
    assert weights.sum() > 0, "no marking signal near the predicted column"
    cols = np.arange(lo, hi, dtype=np.float64)
    return float((weights * cols).sum() / weights.sum())
