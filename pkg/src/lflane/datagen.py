"""Deterministic synthetic dataset trees.

A dataset is a directory holding ``dataset.json`` plus one subdirectory per
sequence (``seq_0000/...``) with per-frame light-field containers, per-frame
label JSON files, and a sequence manifest. Every random draw descends from
``master_seed`` through ``numpy.random.default_rng([master_seed, seq_idx])``
(scene parameters and the degradation plan, in the documented order of
``_draw_scene``) and ``SeedSequence([master_seed, seq_idx, frame_idx])``
(per-frame degradation noise), so regenerating with the same configuration
reproduces the tree byte for byte.

Per sequence, exactly ``round(fraction * frames)`` frames are degraded. Under
``placement="random"`` the degraded frame indices are a sequence-level draw;
under ``placement="tail"`` they are deterministically the last frames of the
sequence (conditions deteriorate over the drive) and no index draw is
consumed. Kind and severity are sequence-level draws either way. Scene
randomization ranges (the *_RANGE constants) are sized so that every label
station stays inside the frame for sequences up to ~12 frames at the default
camera; longer sequences eventually walk the near station out of frame and
raise a ValidationError.
"""

import hashlib
import json
import math
import os
from dataclasses import asdict, dataclass

import numpy as np

from .container import save_lightfield, save_sequence_manifest
from .errors import ValidationError
from .labels import save_label
from .scene import (
    DEGRADATION_KINDS,
    CameraSpec,
    DegradationSpec,
    SceneSpec,
    advance_ego,
    apply_degradation,
    default_camera,
    ground_truth_label,
    render_lightfield,
)

CURVATURE_RANGE = (-0.004, 0.004)
HALF_WIDTH_RANGE = (1.5, 2.0)
MARKING_WIDTH_RANGE = (0.12, 0.2)
EGO_START_RANGE = (0.0, 0.8)
EGO_SPEED_RANGE = (0.08, 0.18)
SURFACE_ALBEDO_RANGE = (0.25, 0.35)
MARKING_ALBEDO_RANGE = (0.75, 0.95)


@dataclass(frozen=True)
class DegradationMix:
    """Which degradations a dataset draws from, how often, and how hard."""

    fraction: float = 0.5
    kinds: tuple = ("low_light", "glare", "blur", "marking_wear")
    severity_range: tuple = (0.5, 1.0)
    placement: str = "random"

    def __post_init__(self):
        if not 0.0 <= self.fraction <= 1.0:
            raise ValidationError("degraded fraction must be in [0, 1]")
        if not self.kinds:
            raise ValidationError("kinds must not be empty")
        for kind in self.kinds:
            if kind not in DEGRADATION_KINDS or kind == "none":
                raise ValidationError(f"invalid degradation kind {kind!r}")
        lo, hi = self.severity_range
        if not 0.0 <= lo <= hi <= 1.0:
            raise ValidationError("severity_range must satisfy 0 <= lo <= hi <= 1")
        if self.placement not in ("random", "tail"):
            raise ValidationError("placement must be 'random' or 'tail'")


def _draw_scene(rng: np.random.Generator) -> SceneSpec:
    """Scene randomization; draw order is part of the dataset format."""
    return SceneSpec(
        curvature=float(rng.uniform(*CURVATURE_RANGE)),
        lane_half_width=float(rng.uniform(*HALF_WIDTH_RANGE)),
        lane_marking_width=float(rng.uniform(*MARKING_WIDTH_RANGE)),
        ego_position=float(rng.uniform(*EGO_START_RANGE)),
        ego_speed=float(rng.uniform(*EGO_SPEED_RANGE)),
        surface_albedo=float(rng.uniform(*SURFACE_ALBEDO_RANGE)),
        marking_albedo=float(rng.uniform(*MARKING_ALBEDO_RANGE)),
    )


def _frame_seed(master_seed: int, seq_idx: int, frame_idx: int) -> int:
    state = np.random.SeedSequence([master_seed, seq_idx, frame_idx])
    return int(state.generate_state(1)[0])


def _generate_sequence(root, seq_idx, frames, angular_res, spatial_res, channels,
                       master_seed, mix, camera, frame_interval):
    rng = np.random.default_rng([master_seed, seq_idx])
    scene = _draw_scene(rng)
    first_scene = scene

    n_degraded = round(mix.fraction * frames)
    if not n_degraded:
        degraded = []
    elif mix.placement == "tail":
        degraded = list(range(frames - n_degraded, frames))
    else:
        degraded = sorted(
            int(j) for j in rng.choice(frames, size=n_degraded, replace=False)
        )
    plan = {}
    for j in degraded:
        kind = mix.kinds[int(rng.integers(len(mix.kinds)))]
        severity = float(rng.uniform(*mix.severity_range))
        plan[j] = DegradationSpec(
            kind=kind, severity=severity,
            rng_seed=_frame_seed(master_seed, seq_idx, j),
        )

    name = f"seq_{seq_idx:04d}"
    seq_dir = os.path.join(root, name)
    os.makedirs(seq_dir, exist_ok=True)
    frame_paths, label_paths = [], []
    for j in range(frames):
        lf = render_lightfield(scene, camera, angular_res, spatial_res, channels)
        label = ground_truth_label(scene, camera, spatial_res)
        if j in plan:
            lf = apply_degradation(lf, plan[j])
        frame_path = os.path.join(seq_dir, f"frame_{j:03d}.lfh")
        save_lightfield(lf, frame_path, sequence_id=name, frame_index=j)
        label_path = os.path.join(seq_dir, f"frame_{j:03d}.label.json")
        save_label(label_path, label, sequence_id=name, frame_index=j)
        frame_paths.append(frame_path)
        label_paths.append(label_path)
        if j + 1 < frames:
            scene = advance_ego(scene)

    manifest_path = os.path.join(seq_dir, "manifest.json")
    save_sequence_manifest(manifest_path, name, frame_paths, label_paths,
                           frame_interval=frame_interval)
    return {
        "name": name,
        "manifest": f"{name}/manifest.json",
        "scene": asdict(first_scene),
        "degraded": [
            {"frame": j, "kind": plan[j].kind, "severity": plan[j].severity}
            for j in degraded
        ],
    }


def generate_dataset(out_dir, n_sequences: int = 60, frames_per_sequence: int = 10,
                     angular_res: int = 5, spatial_res=64, channels: int = 1,
                     master_seed: int = 0, mix: DegradationMix = None,
                     camera: CameraSpec = None, frame_interval: float = 1.0) -> dict:
    """Generate a full dataset tree under out_dir and return its manifest.

    The manifest (also written to ``out_dir/dataset.json``) records the
    configuration, a dataset_id hashed from it, and per-sequence metadata.
    """
    if n_sequences < 1 or frames_per_sequence < 1:
        raise ValidationError("need at least one sequence and one frame")
    mix = DegradationMix() if mix is None else mix
    camera = default_camera(spatial_res if np.isscalar(spatial_res)
                            else max(spatial_res)) if camera is None else camera
    if np.isscalar(spatial_res):
        spatial = [int(spatial_res), int(spatial_res)]
    else:
        spatial = [int(s) for s in spatial_res]

    config = {
        "n_sequences": int(n_sequences),
        "frames_per_sequence": int(frames_per_sequence),
        "angular_res": int(angular_res),
        "spatial_res": spatial,
        "channels": int(channels),
        "master_seed": int(master_seed),
        "frame_interval": float(frame_interval),
        "degraded_fraction": mix.fraction,
        "degradation_kinds": list(mix.kinds),
        "severity_range": list(mix.severity_range),
        "degradation_placement": mix.placement,
        "camera": asdict(camera),
    }
    dataset_id = hashlib.sha256(
        json.dumps(config, sort_keys=True).encode()
    ).hexdigest()[:12]

    os.makedirs(out_dir, exist_ok=True)
    sequences = []
    for i in range(n_sequences):
        sequences.append(_generate_sequence(
            out_dir, i, frames_per_sequence, angular_res, tuple(spatial),
            channels, master_seed, mix, camera, frame_interval,
        ))

    manifest = {"dataset_id": dataset_id, "config": config, "sequences": sequences}
    with open(os.path.join(out_dir, "dataset.json"), "w") as fh:
        json.dump(manifest, fh, sort_keys=True, indent=2)
        fh.write("\n")
    return manifest


def load_dataset(path) -> dict:
    """Read dataset.json (or its directory) and resolve manifest paths."""
    if os.path.isdir(path):
        path = os.path.join(path, "dataset.json")
    if not os.path.isfile(path):
        raise ValidationError(f"no dataset manifest at {path}")
    with open(path) as fh:
        manifest = json.load(fh)
    for key in ("dataset_id", "config", "sequences"):
        if key not in manifest:
            raise ValidationError(f"dataset manifest missing key {key!r}")
    root = os.path.dirname(os.path.abspath(path))
    manifest["root"] = root
    for seq in manifest["sequences"]:
        seq["manifest_path"] = os.path.join(root, seq["manifest"])
    return manifest


def split_dataset(sequences, train_fraction: float = 0.7, seed: int = 0):
    """Seeded shuffle then split at sequence granularity.

    The train side gets floor(train_fraction * n) sequences (an epsilon guards
    against float round-down on exact fractions). Returns (train, test).
    """
    if not 0.0 < train_fraction < 1.0:
        raise ValidationError("train_fraction must be strictly between 0 and 1")
    items = list(sequences)
    n_train = int(math.floor(train_fraction * len(items) + 1e-9))
    order = np.random.default_rng(seed).permutation(len(items))
    train = [items[i] for i in order[:n_train]]
    test = [items[i] for i in order[n_train:]]
    return train, test
