"""Lenslet-style 2D representation of a light field.

The transform interleaves an m x m block of views (those nearest the central
perspective) into macro-pixels while subsampling each view spatially at
stride m, so the output image keeps the source view dimensions: spatial
detail is traded for angular detail at constant size.

Geometry: output pixel (i, j) comes from view (b0 + i mod m, b0 + j mod m)
sampled at spatial location (floor(i/m)*m, floor(j/m)*m), where b0 is the
first index of the selected view block. Every macro-pixel therefore shows one
scene point (anchored at the top-left of its m x m spatial cell) from m*m
neighboring viewpoints, and the transform is exactly invertible to stride-m
subsamples of the source views.
"""

from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from .errors import ValidationError
from .lightfield import LightField
from .validation import check_image


@dataclass(frozen=True, eq=False)
class LensletImage:
    """Single image interleaving m x m views at stride m.

    pixels keeps the (possibly trimmed) source view dimensions; macro_size,
    view_block_start and source_angular_res record the transform geometry.
    """

    pixels: np.ndarray
    macro_size: int
    view_block_start: int
    source_angular_res: int

    def __post_init__(self):
        arr = check_image(self.pixels, "lenslet image")
        m = int(self.macro_size)
        a = int(self.source_angular_res)
        b0 = int(self.view_block_start)
        if not (1 <= m <= a):
            raise ValidationError(f"macro_size must be in [1, A={a}], got {m}")
        if not (0 <= b0 and b0 + m <= a):
            raise ValidationError(
                f"view block [{b0}, {b0 + m}) out of range for A={a}"
            )
        if arr.shape[0] % m or arr.shape[1] % m:
            raise ValidationError(
                f"lenslet image dimensions {arr.shape[:2]} must be multiples "
                f"of macro_size {m}"
            )
        arr = arr.copy() if arr is self.pixels else arr
        arr.setflags(write=False)
        object.__setattr__(self, "pixels", arr)
        object.__setattr__(self, "macro_size", m)
        object.__setattr__(self, "view_block_start", b0)
        object.__setattr__(self, "source_angular_res", a)

    @property
    def view_block(self):
        """The m consecutive angular indices used per axis."""
        return range(self.view_block_start, self.view_block_start + self.macro_size)


def select_views(angular_res: int, macro_size: int) -> range:
    """Pick the m consecutive view indices per axis nearest the center.

    Returns range(b0, b0 + m) with b0 = c - floor((m-1)/2), c = (A-1)/2.
    For even m the center-or-towards-larger-index block is taken, so the
    central view is always included.
    """
    a = int(angular_res)
    m = int(macro_size)
    if a < 1 or a % 2 == 0:
        raise ValidationError(f"angular_res must be odd and >= 1, got {a}")
    if not (1 <= m <= a):
        raise ValidationError(f"macro_size must be in [1, {a}], got {m}")
    c = (a - 1) // 2
    b0 = c - (m - 1) // 2
    return range(b0, b0 + m)


def lenslet_transform(lf: LightField, macro_size: int = 2, trim: bool = True) -> LensletImage:
    """Build the macro-pixel representation of a light field.

    View dimensions not divisible by macro_size are trimmed by dropping
    trailing rows/columns (e.g. 375 -> 374 for m=2) unless trim=False, in
    which case indivisible dimensions are an error. With m=1 the output
    equals the central view.
    """
    m = int(macro_size)
    block = select_views(lf.angular_res, m)
    b0 = block.start
    h, w = lf.spatial_res
    ht, wt = h - h % m, w - w % m
    if (ht, wt) != (h, w) and not trim:
        raise ValidationError(
            f"view dimensions {(h, w)} not divisible by macro_size {m}"
        )
    out = np.empty((ht, wt, lf.channels), dtype=np.float32)
    for a in range(m):
        for b in range(m):
            out[a::m, b::m] = lf.views[b0 + a, b0 + b, 0:ht:m, 0:wt:m]
    return LensletImage(
        pixels=out,
        macro_size=m,
        view_block_start=b0,
        source_angular_res=lf.angular_res,
    )


def recover_view_subgrid(rep: LensletImage, a: int, b: int) -> np.ndarray:
    """Diagnostic inverse: pull one view's stride-m subsample back out.

    Returns the (H/m) x (W/m) image of pixels at (m*p + a, m*q + b), which
    equals view (b0 + a, b0 + b) of the source light field subsampled at
    stride m with top-left anchor.
    """
    m = rep.macro_size
    if not (0 <= a < m and 0 <= b < m):
        raise ValidationError(f"offsets ({a}, {b}) out of range for m={m}")
    return rep.pixels[a::m, b::m]


class LensletTransform(TransformerMixin, BaseEstimator):
    """Stateless sklearn-style transformer wrapping :func:`lenslet_transform`.

    Parameters
    ----------
    macro_size : int, default=2
        Views per macro-pixel axis; must not exceed the angular resolution
        of the inputs.
    trim : bool, default=True
        Drop trailing rows/columns so dimensions divide by macro_size.
    """

    def __init__(self, macro_size=2, trim=True):
        self.macro_size = macro_size
        self.trim = trim

    def fit(self, X, y=None):
        """No-op; validates parameters against the first input if any."""
        if self.macro_size < 1:
            raise ValidationError(f"macro_size must be >= 1, got {self.macro_size}")
        for lf in X:
            select_views(lf.angular_res, self.macro_size)
            break
        return self

    def transform(self, X):
        """Transform an iterable of LightFields into LensletImages."""
        return [lenslet_transform(lf, self.macro_size, trim=self.trim) for lf in X]
