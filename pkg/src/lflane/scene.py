"""Procedural light-field road scenes with exact analytic ground truth.

Geometry (world frame: X lateral, Y up, Z forward; ground plane Y = 0):

* The road centerline follows ``x_center(Z) = curvature/2 * Z**2``, a
  parabolic arc. Lane boundaries run at ``x_center(Z) +- lane_half_width``
  and carry solid marking lines of width ``lane_marking_width``; a dashed
  line of the same width runs along the centerline. Dash on/off is tied to
  absolute Z (period DASH_PERIOD_M, duty DASH_DUTY), so the dash phase in
  view encodes the longitudinal position of the camera.
* The central camera sits at ``(0, height_above_road, ego_position)``,
  pitched down by ``pitch`` radians. View (u, v) of an A x A light field
  translates the camera by ``baseline*(v - c)`` laterally and
  ``baseline*(c - u)`` vertically, c = (A-1)/2.
* Rendering is a direct per-pixel ray cast against the ground plane with
  analytic box-filter anti-aliasing along the lateral (and, for dashes,
  longitudinal) ground footprint of each pixel, so marking positions are
  sub-pixel accurate. Rays above the horizon take the sky value.

Ground-truth labels project five fixed world-Z stations per lane boundary
(geometric progression between STATION_NEAR_M and STATION_FAR_M) through the
central camera. The stations are anchored in the world, not to the camera,
so labels slide toward the image bottom as the ego advances.

Degradation formulas (all constants below; severity s in [0, 1], seeded,
output always within [0, 1]):

* ``low_light``:    the exposure stretches, so round(2*s) passes of the blur
                    kernel soften every view first; the sensor then applies
                    out = clip((1 - 0.8*s)*soft + band + n). n ~ N(0,
                    (0.02*s)^2) is drawn independently per sample (per view,
                    pixel, channel); band is a smooth per-view sensor-
                    nonuniformity field (bilinear 4x4 grid, amplitude 0.10*s,
                    zero-centered) drawn independently for every angular view.
                    Draw order: pixel noise first, then the A*A banding grids
                    row-major. The blur consumes no random draws.
* ``glare``:        scattered stray light. One blur pass softens every view,
                    then two additive parts apply. A compact Gaussian ghost
                    (radius (0.08 + 0.12*s)*min(H, W) px, peak 0.9*s) appears
                    in each view independently with probability 0.5, strength
                    scaled by U[0.6, 1.2], its position shifting a seeded
                    2-4 px per angular index. On top of that, every view gets
                    a smooth veiling stray-light field (bilinear 3x3 grid,
                    amplitude 0.12*s*U[0.5, 1] drawn per view). Draw order:
                    blob row/col/shift, the A*A hit, strength, and
                    veil-amplitude grids, then the per-view veil fields
                    row-major.
* ``blur``:         round(6*s) passes of a separable [1, 2, 1]/4 kernel,
                    identical for every view.
* ``marking_wear``: out = (1 - s*M)*x + s*M*0.3 with M a seeded smooth
                    patchy mask (squared bilinear noise), shared by all views.
"""

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import ValidationError
from .labels import points_to_label
from .lightfield import LightField

SKY_VALUE = 0.10
STATION_NEAR_M = 7.0
STATION_FAR_M = 30.0
STATION_COUNT = 5
MIN_STATION_AHEAD_M = 0.5

DASH_PERIOD_M = 4.0
DASH_DUTY = 0.5

LOW_LIGHT_GAIN_SLOPE = 0.8
LOW_LIGHT_NOISE_SCALE = 0.02
LOW_LIGHT_BAND_SCALE = 0.10
LOW_LIGHT_BAND_GRID = 4
LOW_LIGHT_BLUR_SLOPE = 2.0
GLARE_RADIUS_BASE = 0.08
GLARE_RADIUS_SLOPE = 0.12
GLARE_PEAK_SLOPE = 0.9
GLARE_SHIFT_MIN_PX = 2.0
GLARE_SHIFT_MAX_PX = 4.0
GLARE_HIT_FRACTION = 0.5
GLARE_STRENGTH_MIN = 0.6
GLARE_STRENGTH_MAX = 1.2
GLARE_VEIL_SCALE = 0.12
GLARE_VEIL_GRID = 3
GLARE_VEIL_FLOOR = 0.5
GLARE_BLUR_PASSES = 1
BLUR_MAX_PASSES = 6
WEAR_TONE = 0.3
WEAR_GRID = 6

DEGRADATION_KINDS = ("none", "low_light", "glare", "blur", "marking_wear")

# Color tints applied per region when rendering 3-channel output.
ROAD_TINT = (1.0, 0.99, 0.97)
MARK_TINT = (1.0, 1.0, 0.88)
SKY_TINT = (0.8, 0.9, 1.0)


@dataclass(frozen=True)
class SceneSpec:
    """Road geometry, ego state, and surface reflectances (all SI units)."""

    lane_half_width: float = 1.75
    curvature: float = 0.0
    lane_marking_width: float = 0.15
    ego_position: float = 0.0
    ego_speed: float = 0.12
    surface_albedo: float = 0.3
    marking_albedo: float = 0.85

    def __post_init__(self):
        if not self.lane_half_width > 0:
            raise ValidationError("lane_half_width must be positive")
        if not self.lane_marking_width > 0:
            raise ValidationError("lane_marking_width must be positive")
        if not 0.0 <= self.surface_albedo <= 1.0:
            raise ValidationError("surface_albedo must be in [0, 1]")
        if not 0.0 <= self.marking_albedo <= 1.0:
            raise ValidationError("marking_albedo must be in [0, 1]")
        if not self.marking_albedo > self.surface_albedo:
            raise ValidationError("markings must be brighter than the road surface")
        if abs(self.curvature) * STATION_FAR_M >= 1.0:
            raise ValidationError(
                f"|curvature| must stay below {1.0 / STATION_FAR_M:.4f} 1/m "
                "so the road stays in frame"
            )
        if self.ego_speed < 0:
            raise ValidationError("ego_speed must be non-negative")


@dataclass(frozen=True)
class CameraSpec:
    """Pinhole rig: height and pitch of the optical center, focal in pixels,
    baseline in meters between adjacent angular views."""

    height_above_road: float = 1.5
    focal_length: float = 64.0
    pitch: float = 0.12
    baseline: float = 0.05

    def __post_init__(self):
        if not self.height_above_road > 0:
            raise ValidationError("height_above_road must be positive")
        if not self.focal_length > 0:
            raise ValidationError("focal_length must be positive")
        if self.baseline < 0:
            raise ValidationError("baseline must be non-negative")
        if not abs(self.pitch) < math.pi / 2:
            raise ValidationError("pitch must be in (-pi/2, pi/2)")


@dataclass(frozen=True)
class DegradationSpec:
    """One degradation kind with severity in [0, 1] and its own seed."""

    kind: str = "none"
    severity: float = 0.0
    rng_seed: int = 0

    def __post_init__(self):
        if self.kind not in DEGRADATION_KINDS:
            raise ValidationError(
                f"unknown degradation kind {self.kind!r}; "
                f"choose from {DEGRADATION_KINDS}"
            )
        if not 0.0 <= self.severity <= 1.0:
            raise ValidationError("severity must be in [0, 1]")


def default_camera(spatial_res: int) -> CameraSpec:
    """Rig scaled to the view size: focal length equal to the image width."""
    return CameraSpec(focal_length=float(spatial_res))


def advance_ego(scene: SceneSpec) -> SceneSpec:
    """Move the ego forward by one frame interval (ego_speed meters)."""
    return replace(scene, ego_position=scene.ego_position + scene.ego_speed)


def _road_center_x(curvature: float, z: np.ndarray) -> np.ndarray:
    return 0.5 * curvature * z * z


def _dash_on_length(z: np.ndarray) -> np.ndarray:
    """Measure of the dash-on set within [0, z] (antiderivative of the gate)."""
    on = DASH_DUTY * DASH_PERIOD_M
    full = np.floor(z / DASH_PERIOD_M)
    return full * on + np.minimum(z - full * DASH_PERIOD_M, on)


def _band_coverage(x: np.ndarray, footprint: np.ndarray, lo, hi) -> np.ndarray:
    """Fraction of each pixel's lateral footprint overlapping the band [lo, hi]."""
    half = 0.5 * footprint
    overlap = np.minimum(x + half, hi) - np.maximum(x - half, lo)
    return np.clip(overlap / footprint, 0.0, 1.0)


def _render_view(scene, cam, cam_x, cam_y, cam_z, height, width, channels):
    f = cam.focal_length
    cy, cx = (height - 1) / 2.0, (width - 1) / 2.0
    sin_p, cos_p = math.sin(cam.pitch), math.cos(cam.pitch)

    col = np.arange(width, dtype=np.float64)
    row = np.arange(height, dtype=np.float64)
    dx = (col[None, :] - cx) / f
    dy = (row[:, None] - cy) / f

    # World-frame ray directions; the ray parameter t equals camera depth.
    dir_y = -dy * cos_p - sin_p
    dir_z = -dy * sin_p + cos_p
    ground = dir_y < -1e-12
    if not ground.any():
        raise ValidationError("degenerate camera: horizon above the full frame")

    t = np.where(ground, cam_y / np.maximum(-dir_y, 1e-12), np.nan)
    x_g = cam_x + t * dx
    z_g = cam_z + t * dir_z
    z_ahead = z_g - cam_z

    # Ground footprint of one pixel: exact laterally, finite-difference in Z.
    foot_x = np.broadcast_to(t / f, x_g.shape)
    foot_z = np.abs(np.gradient(np.where(ground, z_ahead, 0.0), axis=0))
    foot_z = np.maximum(foot_z, 1e-9)

    center = _road_center_x(scene.curvature, z_g)
    half_mark = 0.5 * scene.lane_marking_width
    coverage = np.zeros_like(x_g)
    for side in (-1.0, 1.0):
        b = center + side * scene.lane_half_width
        coverage += _band_coverage(x_g, foot_x, b - half_mark, b + half_mark)

    z0 = np.maximum(z_g - 0.5 * foot_z, 0.0)
    z1 = z_g + 0.5 * foot_z
    dash_gate = (_dash_on_length(z1) - _dash_on_length(z0)) / (z1 - z0)
    coverage += dash_gate * _band_coverage(
        x_g, foot_x, center - half_mark, center + half_mark
    )
    coverage = np.clip(np.where(ground, coverage, 0.0), 0.0, 1.0)

    value = scene.surface_albedo + coverage * (
        scene.marking_albedo - scene.surface_albedo
    )
    if channels == 1:
        out = np.where(ground, value, SKY_VALUE)[:, :, None]
    else:
        ground_tint = (
            np.asarray(ROAD_TINT)[None, None, :] * (1.0 - coverage[:, :, None])
            + np.asarray(MARK_TINT)[None, None, :] * coverage[:, :, None]
        )
        out = np.where(
            ground[:, :, None],
            value[:, :, None] * ground_tint,
            SKY_VALUE * np.asarray(SKY_TINT)[None, None, :],
        )
    return out.astype(np.float32)


def render_lightfield(scene: SceneSpec, cam: CameraSpec, angular_res: int = 5,
                      spatial_res=(64, 64), channels: int = 1) -> LightField:
    """Render all A x A perspective views of the scene.

    spatial_res may be an int (square views) or an (H, W) pair; channels must
    be 1 (grayscale) or 3 (tinted RGB). Deterministic given its inputs.
    """
    a = int(angular_res)
    if a < 1 or a % 2 == 0:
        raise ValidationError(f"angular_res must be odd and >= 1, got {a}")
    if channels not in (1, 3):
        raise ValidationError(f"channels must be 1 or 3, got {channels}")
    if np.isscalar(spatial_res):
        height = width = int(spatial_res)
    else:
        height, width = (int(s) for s in spatial_res)
    c = (a - 1) // 2
    if cam.height_above_road - cam.baseline * c <= 0:
        raise ValidationError("baseline too large: lowest view dips under the road")

    views = np.empty((a, a, height, width, channels), dtype=np.float32)
    for u in range(a):
        for v in range(a):
            views[u, v] = _render_view(
                scene,
                cam,
                cam_x=cam.baseline * (v - c),
                cam_y=cam.height_above_road + cam.baseline * (c - u),
                cam_z=scene.ego_position,
                height=height,
                width=width,
                channels=channels,
            )
    return LightField(views=views)


def label_stations(near: float = STATION_NEAR_M, far: float = STATION_FAR_M) -> np.ndarray:
    """The five world-Z label stations: a geometric progression near..far."""
    return near * (far / near) ** (np.arange(STATION_COUNT) / (STATION_COUNT - 1))


def project_ground_point(cam: CameraSpec, ego_position: float, x: float, z: float,
                         height: int, width: int):
    """Project world ground point (x, 0, z) through the central camera.

    Returns (col, row) in pixel coordinates; raises if the point is behind
    the near clip or lands outside the frame.
    """
    sin_p, cos_p = math.sin(cam.pitch), math.cos(cam.pitch)
    rel_x = x
    rel_y = -cam.height_above_road
    rel_z = z - ego_position
    z_cam = -rel_y * sin_p + rel_z * cos_p
    if z_cam * cos_p < MIN_STATION_AHEAD_M:
        raise ValidationError(
            f"label station at Z={z:.2f} m is behind the camera near clip"
        )
    y_cam = -rel_y * cos_p - rel_z * sin_p
    colf = (width - 1) / 2.0 + cam.focal_length * rel_x / z_cam
    rowf = (height - 1) / 2.0 + cam.focal_length * y_cam / z_cam
    if not (0.0 <= colf <= width - 1 and 0.0 <= rowf <= height - 1):
        raise ValidationError(
            f"label station at Z={z:.2f} m projects outside the frame "
            f"(col={colf:.1f}, row={rowf:.1f})"
        )
    return colf, rowf


def ground_truth_label(scene: SceneSpec, cam: CameraSpec, spatial_res=(64, 64),
                       stations=None) -> np.ndarray:
    """Exact lane label for the central view: 2 boundaries x 5 stations.

    Boundary points at the label stations are projected through the central
    camera and normalized by (width-1, height-1). Raises if any station is
    occluded by the frame edge or the near clip.
    """
    if np.isscalar(spatial_res):
        height = width = int(spatial_res)
    else:
        height, width = (int(s) for s in spatial_res)
    z = label_stations() if stations is None else np.asarray(stations, dtype=np.float64)
    boundaries = []
    for side in (-1.0, 1.0):
        pts = []
        for zk in z:
            x = _road_center_x(scene.curvature, zk) + side * scene.lane_half_width
            colf, rowf = project_ground_point(
                cam, scene.ego_position, x, float(zk), height, width
            )
            pts.append((colf / (width - 1), rowf / (height - 1)))
        boundaries.append(pts)
    return points_to_label(boundaries[0], boundaries[1])


# ---------------------------------------------------------------------------
# Degradations
# ---------------------------------------------------------------------------


def _blur_axis(x: np.ndarray, axis: int) -> np.ndarray:
    """One [1, 2, 1]/4 smoothing pass along an axis with clamped edges."""
    lo = np.take(x, [0], axis=axis)
    hi = np.take(x, [x.shape[axis] - 1], axis=axis)
    padded = np.concatenate([lo, x, hi], axis=axis)
    n = x.shape[axis]
    left = np.take(padded, range(0, n), axis=axis)
    mid = np.take(padded, range(1, n + 1), axis=axis)
    right = np.take(padded, range(2, n + 2), axis=axis)
    return 0.25 * left + 0.5 * mid + 0.25 * right


def _soften(x: np.ndarray, passes: int) -> np.ndarray:
    """`passes` separable blur passes over the two spatial axes of (A,A,H,W,C)."""
    for _ in range(passes):
        x = _blur_axis(_blur_axis(x, axis=2), axis=3)
    return x


def _bilinear_noise(rng, height: int, width: int, grid: int) -> np.ndarray:
    """Smooth [0, 1] noise: a coarse uniform grid upsampled bilinearly."""
    coarse = rng.uniform(0.0, 1.0, size=(grid, grid))
    ry = np.linspace(0.0, grid - 1.0, height)
    rx = np.linspace(0.0, grid - 1.0, width)
    y0 = np.minimum(np.floor(ry).astype(int), grid - 2)
    x0 = np.minimum(np.floor(rx).astype(int), grid - 2)
    fy = (ry - y0)[:, None]
    fx = (rx - x0)[None, :]
    c00 = coarse[np.ix_(y0, x0)]
    c01 = coarse[np.ix_(y0, x0 + 1)]
    c10 = coarse[np.ix_(y0 + 1, x0)]
    c11 = coarse[np.ix_(y0 + 1, x0 + 1)]
    return (c00 * (1 - fy) * (1 - fx) + c01 * (1 - fy) * fx
            + c10 * fy * (1 - fx) + c11 * fy * fx)


def apply_degradation(lf: LightField, spec: DegradationSpec) -> LightField:
    """Apply one seeded degradation; see the module docstring for formulas.

    severity 0 (or kind 'none') returns the input unchanged, bit for bit.
    """
    s = float(spec.severity)
    if spec.kind == "none" or s == 0.0:
        return lf
    rng = np.random.default_rng(spec.rng_seed)
    a = lf.angular_res
    h, w = lf.spatial_res
    ch = lf.channels
    x = lf.views.astype(np.float64)

    if spec.kind == "low_light":
        soft = _soften(x, round(LOW_LIGHT_BLUR_SLOPE * s))
        gain = 1.0 - LOW_LIGHT_GAIN_SLOPE * s
        noise = rng.normal(0.0, LOW_LIGHT_NOISE_SCALE * s, size=x.shape)
        out = gain * soft + noise
        amp = LOW_LIGHT_BAND_SCALE * s
        for u in range(a):
            for v in range(a):
                band = _bilinear_noise(rng, h, w, LOW_LIGHT_BAND_GRID)
                out[u, v] += amp * (2.0 * band - 1.0)[:, :, None]

    elif spec.kind == "glare":
        row0 = rng.uniform(0.05, 0.55) * h
        col0 = rng.uniform(0.1, 0.9) * w
        shift = rng.uniform(GLARE_SHIFT_MIN_PX, GLARE_SHIFT_MAX_PX)
        hit = rng.random(size=(a, a)) < GLARE_HIT_FRACTION
        strength = rng.uniform(GLARE_STRENGTH_MIN, GLARE_STRENGTH_MAX,
                               size=(a, a))
        veil_amp = GLARE_VEIL_SCALE * s * rng.uniform(GLARE_VEIL_FLOOR, 1.0,
                                                      size=(a, a))
        sigma = (GLARE_RADIUS_BASE + GLARE_RADIUS_SLOPE * s) * min(h, w)
        peak = GLARE_PEAK_SLOPE * s
        rows = np.arange(h, dtype=np.float64)[:, None]
        cols = np.arange(w, dtype=np.float64)[None, :]
        c = (a - 1) // 2
        out = _soften(x, GLARE_BLUR_PASSES)
        for u in range(a):
            for v in range(a):
                veil = _bilinear_noise(rng, h, w, GLARE_VEIL_GRID)
                add = veil_amp[u, v] * veil
                if hit[u, v]:
                    r2 = ((rows - (row0 + shift * (c - u))) ** 2
                          + (cols - (col0 + shift * (v - c))) ** 2)
                    add = add + (peak * strength[u, v]
                                 * np.exp(-r2 / (2 * sigma * sigma)))
                out[u, v] += add[:, :, None]

    elif spec.kind == "blur":
        out = _soften(x, round(BLUR_MAX_PASSES * s))

    elif spec.kind == "marking_wear":
        mask = _bilinear_noise(rng, h, w, WEAR_GRID) ** 2
        weight = s * mask[None, None, :, :, None]
        out = (1.0 - weight) * x + weight * WEAR_TONE

    else:  # pragma: no cover - guarded by DegradationSpec
        raise ValidationError(f"unknown degradation kind {spec.kind!r}")

    out = np.clip(out, 0.0, 1.0).astype(np.float32)
    return LightField(views=out.reshape(a, a, h, w, ch))
