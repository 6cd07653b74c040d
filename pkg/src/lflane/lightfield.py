"""Light-field data model: an A x A grid of perspective views plus sequences.

A light field is stored as a single float32 array of shape
(A, A, H, W, C) holding radiance samples in [0, 1]. The angular resolution A
is restricted to odd values so the central perspective is unambiguous.
Images are plain (H, W, C) float32 arrays.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError
from .validation import as_sample_array, check_odd_angular


@dataclass(frozen=True, eq=False)
class LightField:
    """Immutable 4D radiance sample grid: A x A views, each H x W x C."""

    views: np.ndarray

    def __post_init__(self):
        arr = as_sample_array(self.views, "light field")
        if arr.ndim != 5 or arr.shape[0] != arr.shape[1]:
            raise ValidationError(
                "light field views must have shape (A, A, H, W, C), "
                f"got {arr.shape}"
            )
        check_odd_angular(arr.shape[0])
        if min(arr.shape[2:]) < 1:
            raise ValidationError(f"light field has a zero extent: {arr.shape}")
        arr = arr.copy() if arr is self.views else arr
        arr.setflags(write=False)
        object.__setattr__(self, "views", arr)

    @property
    def angular_res(self):
        return self.views.shape[0]

    @property
    def spatial_res(self):
        return self.views.shape[2], self.views.shape[3]

    @property
    def channels(self):
        return self.views.shape[4]

    @property
    def central_index(self):
        return (self.angular_res - 1) // 2


def extract_view(lf: LightField, u: int, v: int) -> np.ndarray:
    """Return the (u, v) perspective view, unmodified."""
    a = lf.angular_res
    if not (0 <= u < a and 0 <= v < a):
        raise ValidationError(f"view index ({u}, {v}) out of range for A={a}")
    return lf.views[u, v]


def central_view(lf: LightField) -> np.ndarray:
    """Return the central perspective view at angular index ((A-1)/2, (A-1)/2)."""
    c = lf.central_index
    return extract_view(lf, c, c)


@dataclass(frozen=True, eq=False)
class LightFieldSequence:
    """Temporally ordered light fields sharing identical dimensions."""

    frames: tuple
    sequence_id: str = ""
    frame_interval: float = 1.0

    def __post_init__(self):
        frames = tuple(self.frames)
        if not frames:
            raise ValidationError("sequence must contain at least one frame")
        ref = frames[0].views.shape
        for i, fr in enumerate(frames):
            if not isinstance(fr, LightField):
                raise ValidationError(f"frame {i} is not a LightField")
            if fr.views.shape != ref:
                raise ValidationError(
                    f"frame {i} has shape {fr.views.shape}, expected {ref}"
                )
        if not (self.frame_interval > 0):
            raise ValidationError("frame_interval must be positive")
        object.__setattr__(self, "frames", frames)

    def __len__(self):
        return len(self.frames)

    @property
    def angular_res(self):
        return self.frames[0].angular_res

    @property
    def spatial_res(self):
        return self.frames[0].spatial_res

    @property
    def channels(self):
        return self.frames[0].channels
