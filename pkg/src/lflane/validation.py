"""Input validation helpers used by the estimator classes and file loaders."""

import numpy as np

from .errors import ValidationError


def as_sample_array(data, name="array"):
    """Coerce to a float32 ndarray, rejecting non-finite or out-of-range values.

    All radiance-like data in this package lives in [0, 1] and is stored as
    float32; violations are an error rather than a silent clamp.
    """
    arr = np.asarray(data, dtype=np.float32)
    if not np.all(np.isfinite(arr)):
        raise ValidationError(f"{name} contains non-finite values")
    if arr.size and (arr.min() < 0.0 or arr.max() > 1.0):
        raise ValidationError(
            f"{name} has values outside [0, 1] "
            f"(min={arr.min():.6g}, max={arr.max():.6g})"
        )
    return arr


def check_odd_angular(a, name="angular_res"):
    a = int(a)
    if a < 1 or a % 2 == 0:
        raise ValidationError(f"{name} must be odd and >= 1, got {a}")
    return a


def check_image(pixels, name="image"):
    """Validate an H x W x C image array (values in [0, 1], extents >= 1)."""
    arr = as_sample_array(pixels, name)
    if arr.ndim != 3:
        raise ValidationError(f"{name} must be H x W x C, got shape {arr.shape}")
    if min(arr.shape) < 1:
        raise ValidationError(f"{name} has a zero extent: {arr.shape}")
    return arr


def check_lane_label(vec, name="label"):
    """Validate a flattened 20-element lane label.

    Layout: left boundary near-to-far then right boundary near-to-far,
    five (x, y) pairs each, interleaved, all coordinates normalized to [0, 1].
    Within each boundary y must be strictly decreasing (near points sit lower
    in the image).
    """
    arr = np.asarray(vec, dtype=np.float64).reshape(-1)
    if arr.shape != (20,):
        raise ValidationError(f"{name} must have exactly 20 values, got {arr.size}")
    if not np.all(np.isfinite(arr)):
        raise ValidationError(f"{name} contains non-finite values")
    if arr.min() < 0.0 or arr.max() > 1.0:
        raise ValidationError(f"{name} has coordinates outside [0, 1]")
    pts = arr.reshape(10, 2)
    for side, block in (("left", pts[:5]), ("right", pts[5:])):
        y = block[:, 1]
        if not np.all(np.diff(y) < 0):
            raise ValidationError(
                f"{name}: {side} boundary y-coordinates must strictly decrease "
                "from near to far"
            )
    return arr


def check_batch_2d(x, n_cols, name="X"):
    """Validate a 2-D float batch with a fixed column count."""
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[1] != n_cols:
        raise ValidationError(
            f"{name} must be (n_samples, {n_cols}), got shape {arr.shape}"
        )
    if not np.all(np.isfinite(arr)):
        raise ValidationError(f"{name} contains non-finite values")
    return arr
