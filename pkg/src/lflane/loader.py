"""Turning dataset trees into model-ready arrays, per input modality.

* ``regular2d``   the central view of each light field.
* ``lf_single``   the interleaved lenslet image of each light field.
* ``lf_temporal`` the lenslet image of every frame in a sequence.

The central view is trimmed with the same rule the lenslet transform uses
(spatial dims cut to multiples of macro_size), so regular2d and lf_single
inputs always share their shape and the two models share parameter counts.
Arrays are channels-first float32; labels are float64 (N, 20).
"""

import numpy as np

from .container import load_lightfield, read_sequence_manifest
from .errors import ValidationError
from .labels import load_label
from .lenslet import lenslet_transform
from .lightfield import LightField, central_view
from .model import MODALITIES

_SINGLE_FRAME = ("regular2d", "lf_single")


def check_modality(modality: str) -> str:
    if modality not in MODALITIES:
        raise ValidationError(
            f"modality must be one of {MODALITIES}, got {modality!r}")
    return modality


def frame_to_input(lf: LightField, modality: str, macro_size: int = 2) -> np.ndarray:
    """One light field -> one (C, H', W') channels-first input plane."""
    check_modality(modality)
    if modality == "regular2d":
        view = central_view(lf)
        h, w = view.shape[:2]
        view = view[:h - h % macro_size, :w - w % macro_size]
        return np.ascontiguousarray(view.transpose(2, 0, 1))
    rep = lenslet_transform(lf, macro_size=macro_size)
    return np.ascontiguousarray(rep.pixels.transpose(2, 0, 1))


def load_sequence_data(manifest_path, modality: str, macro_size: int = 2):
    """One sequence manifest -> ((T, C, H', W') inputs, (T, 20) labels)."""
    doc = read_sequence_manifest(manifest_path)
    if "labels" not in doc:
        raise ValidationError(f"{manifest_path} lists no label files")
    if len(doc["labels"]) != len(doc["frames"]):
        raise ValidationError(f"{manifest_path}: frame/label count mismatch")
    plane = "lf_single" if modality == "lf_temporal" else modality
    frames = np.stack([
        frame_to_input(load_lightfield(p), plane, macro_size)
        for p in doc["frames"]
    ])
    labels = np.stack([load_label(p) for p in doc["labels"]])
    return frames, labels


def load_modality_split(manifest_paths, modality: str, macro_size: int = 2,
                        final_frame_only: bool = False):
    """Load a list of sequences as one modality's arrays.

    Returns (x, y). For single-frame modalities x is (N, C, H, W) where N
    counts frames (or sequences, when final_frame_only); for lf_temporal x is
    (T, N, C, H, W) with N counting sequences. y is always (N, 20); temporal
    sequences are labeled by their final frame.
    """
    check_modality(modality)
    if not manifest_paths:
        raise ValidationError("no sequences to load")
    xs, ys = [], []
    t_expected = None
    for path in manifest_paths:
        frames, labels = load_sequence_data(path, modality, macro_size)
        if modality == "lf_temporal":
            if t_expected is None:
                t_expected = len(frames)
            elif len(frames) != t_expected:
                raise ValidationError(
                    f"{path} has {len(frames)} frames, expected {t_expected}")
            xs.append(frames)
            ys.append(labels[-1])
        elif final_frame_only:
            xs.append(frames[-1])
            ys.append(labels[-1])
        else:
            xs.extend(frames)
            ys.extend(labels)
    if modality == "lf_temporal":
        # (N, T, C, H, W) -> time-major (T, N, C, H, W)
        x = np.stack(xs).transpose(1, 0, 2, 3, 4)
    else:
        x = np.stack(xs)
    return x, np.stack(ys).astype(np.float64)
