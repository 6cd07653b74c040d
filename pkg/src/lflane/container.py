"""Lossless header+blob container for light fields and lenslet images.

A container is a pair of files: a human-readable text header and a flat
binary blob of 32-bit little-endian floats. The header holds one
``key: value`` pair per line; lines starting with ``#`` are comments.

Required keys::

    angular_res: 5          views per angular axis (1 for plain images)
    height: 64              spatial rows per view
    width: 64               spatial columns per view
    channels: 1
    dtype: f32              fixed
    layout: uvyxc           fixed sample order [u][v][y][x][c]
    blob: frame_000.lfb     blob path relative to the header

Optional keys: ``sequence_id``, ``frame_index`` for provenance, and
``macro_size`` / ``view_block_start`` / ``source_angular_res`` for lenslet
images (stored with angular_res 1). Unknown keys are preserved on load and
ignored otherwise. Out-of-range or non-finite samples are an error, never
clamped.

A sequence manifest is a JSON file with ``sequence_id`` and an ordered
``frames`` list of header paths (relative to the manifest), optionally a
parallel ``labels`` list and a ``frame_interval``.
"""

import json
import os
from pathlib import Path

import numpy as np

from .errors import ValidationError
from .lenslet import LensletImage
from .lightfield import LightField, LightFieldSequence

_REQUIRED_KEYS = ("angular_res", "height", "width", "channels", "dtype", "layout", "blob")
_LENSLET_KEYS = ("macro_size", "view_block_start", "source_angular_res")


def _parse_header(path: Path) -> dict:
    if not path.is_file():
        raise FileNotFoundError(f"header file not found: {path}")
    fields = {}
    for lineno, line in enumerate(path.read_text().splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if ":" not in line:
            raise ValidationError(f"{path}:{lineno}: expected 'key: value', got {line!r}")
        key, value = line.split(":", 1)
        fields[key.strip()] = value.strip()
    missing = [k for k in _REQUIRED_KEYS if k not in fields]
    if missing:
        raise ValidationError(f"{path}: missing header keys {missing}")
    if fields["dtype"] != "f32":
        raise ValidationError(f"{path}: unsupported dtype {fields['dtype']!r}")
    if fields["layout"] != "uvyxc":
        raise ValidationError(f"{path}: unsupported layout {fields['layout']!r}")
    return fields


def _read_blob(header_path: Path, fields: dict, count: int) -> np.ndarray:
    blob_path = header_path.parent / fields["blob"]
    if not blob_path.is_file():
        raise FileNotFoundError(f"blob file not found: {blob_path}")
    raw = blob_path.read_bytes()
    if len(raw) != 4 * count:
        raise ValidationError(
            f"{blob_path}: blob holds {len(raw) // 4} samples "
            f"({len(raw)} bytes), header implies {count}"
        )
    return np.frombuffer(raw, dtype="<f4").astype(np.float32, copy=False)


def _write_container(path, array: np.ndarray, extra: dict) -> None:
    """Write header at ``path`` plus the companion blob next to it."""
    path = Path(path)
    a, h, w, c = extra.pop("_dims")
    blob_name = path.stem + (".lsb" if path.suffix == ".lsh" else ".lfb")
    lines = [
        f"angular_res: {a}",
        f"height: {h}",
        f"width: {w}",
        f"channels: {c}",
        "dtype: f32",
        "layout: uvyxc",
        f"blob: {blob_name}",
    ]
    lines += [f"{k}: {v}" for k, v in extra.items() if v is not None and v != ""]
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("\n".join(lines) + "\n")
    (path.parent / blob_name).write_bytes(
        np.ascontiguousarray(array, dtype="<f4").tobytes()
    )


def save_lightfield(lf: LightField, path, sequence_id=None, frame_index=None) -> None:
    """Write a light field as header + blob; round-trips bit-exactly."""
    a = lf.angular_res
    h, w = lf.spatial_res
    extra = {"_dims": (a, h, w, lf.channels)}
    if sequence_id is not None:
        extra["sequence_id"] = sequence_id
    if frame_index is not None:
        extra["frame_index"] = int(frame_index)
    _write_container(path, lf.views, extra)


def load_lightfield(path) -> LightField:
    """Load a light field container written by :func:`save_lightfield`."""
    path = Path(path)
    fields = _parse_header(path)
    a = int(fields["angular_res"])
    h, w, c = int(fields["height"]), int(fields["width"]), int(fields["channels"])
    data = _read_blob(path, fields, a * a * h * w * c)
    try:
        return LightField(views=data.reshape(a, a, h, w, c))
    except ValidationError as err:
        raise ValidationError(f"{path}: {err}") from err


def save_lenslet_image(rep: LensletImage, path) -> None:
    """Write a lenslet image in the shared container format (angular_res 1)."""
    h, w, c = rep.pixels.shape
    _write_container(
        path,
        rep.pixels,
        {
            "_dims": (1, h, w, c),
            "macro_size": rep.macro_size,
            "view_block_start": rep.view_block_start,
            "source_angular_res": rep.source_angular_res,
        },
    )


def load_lenslet_image(path) -> LensletImage:
    path = Path(path)
    fields = _parse_header(path)
    missing = [k for k in _LENSLET_KEYS if k not in fields]
    if missing:
        raise ValidationError(f"{path}: not a lenslet container, missing {missing}")
    if int(fields["angular_res"]) != 1:
        raise ValidationError(f"{path}: lenslet containers store a single image")
    h, w, c = int(fields["height"]), int(fields["width"]), int(fields["channels"])
    data = _read_blob(path, fields, h * w * c)
    return LensletImage(
        pixels=data.reshape(h, w, c),
        macro_size=int(fields["macro_size"]),
        view_block_start=int(fields["view_block_start"]),
        source_angular_res=int(fields["source_angular_res"]),
    )


def save_sequence_manifest(path, sequence_id, frame_paths, label_paths=None,
                           frame_interval=1.0) -> None:
    """Write a sequence manifest; frame/label paths are stored relative to it."""
    path = Path(path)
    base = path.parent
    doc = {
        "sequence_id": sequence_id,
        "frame_interval": frame_interval,
        "frames": [os.path.relpath(p, base) for p in frame_paths],
    }
    if label_paths is not None:
        doc["labels"] = [os.path.relpath(p, base) for p in label_paths]
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")


def read_sequence_manifest(path) -> dict:
    """Read a sequence manifest, resolving paths against its directory."""
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"sequence manifest not found: {path}")
    doc = json.loads(path.read_text())
    for key in ("sequence_id", "frames"):
        if key not in doc:
            raise ValidationError(f"{path}: manifest missing {key!r}")
    if not doc["frames"]:
        raise ValidationError(f"{path}: manifest lists no frames")
    doc["frames"] = [str(path.parent / p) for p in doc["frames"]]
    if "labels" in doc:
        doc["labels"] = [str(path.parent / p) for p in doc["labels"]]
    return doc


def load_sequence(manifest_path) -> LightFieldSequence:
    """Load the frames listed by a sequence manifest, in manifest order.

    Frames must agree in all dimensions; mixed dimensions are an error.
    """
    doc = read_sequence_manifest(manifest_path)
    frames = [load_lightfield(p) for p in doc["frames"]]
    return LightFieldSequence(
        frames=tuple(frames),
        sequence_id=str(doc["sequence_id"]),
        frame_interval=float(doc.get("frame_interval", 1.0)),
    )


def save_view_png(image: np.ndarray, path) -> None:
    """Export one view as an 8-bit PNG for human inspection.

    Values are mapped by round-half-up of value*255. Supports single- and
    three-channel images.
    """
    from PIL import Image as PILImage

    arr = np.asarray(image, dtype=np.float64)
    if arr.ndim != 3 or arr.shape[2] not in (1, 3):
        raise ValidationError(f"PNG export needs H x W x 1 or H x W x 3, got {arr.shape}")
    quantized = np.floor(arr * 255.0 + 0.5).clip(0, 255).astype(np.uint8)
    if quantized.shape[2] == 1:
        img = PILImage.fromarray(quantized[:, :, 0], mode="L")
    else:
        img = PILImage.fromarray(quantized, mode="RGB")
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    img.save(path)
