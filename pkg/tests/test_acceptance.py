"""End-to-end acceptance gate.

Seven release criteria, one test each. Every test prints a single
[PASS]/[FAIL] line with its key measurement and enforces a wall-clock
budget, so a full run doubles as a release report:

1. gradient fidelity of every layer and of full model compositions;
2. lenslet representation correctness (identity, invertibility, shape);
3. synthetic-scene physics (disparity, zero baseline, label symmetry);
4. training sanity (overfit probe, bit-reproducible histories);
5. modality quality ordering on the desk-scale benchmark;
6. protocol constants (schedule values, split size, head width);
7. bit-exact save/load round trips for every file format.
"""

import time

import numpy as np
import pytest

from conftest import (
    ground_depth_at_row,
    marking_centroid,
    predicted_boundary_col,
    random_lightfield,
)
from lflane import (
    LABEL_SIZE,
    CameraSpec,
    DegradationMix,
    ModelConfig,
    SceneSpec,
    TrainConfig,
    central_view,
    evaluate_model,
    generate_dataset,
    ground_truth_label,
    init_params,
    label_to_points,
    lenslet_transform,
    load_checkpoint,
    load_dataset,
    load_label,
    load_lenslet_image,
    load_lightfield,
    predict_in_batches,
    recover_view_subgrid,
    render_lightfield,
    save_checkpoint,
    save_label,
    save_lenslet_image,
    save_lightfield,
    select_views,
    split_dataset,
    train_model,
)
from lflane.loader import load_modality_split
from lflane.model import gradcheck_model
from lflane.nn.gradcheck import gradcheck_battery
from lflane.nn.optim import LrSchedule, lr_at_epoch

GRAD_TOL = 1e-4
SEEDS = (1, 2, 3)

# Desk-scale benchmark: 60 ten-frame sequences at 5x5 angular and 64x64
# spatial resolution, half of all frames degraded (severity >= 0.5) at the
# tail of each drive, 70/30 split, identical training budgets per modality.
BENCH_DATASET = dict(n_sequences=60, frames_per_sequence=10, angular_res=5,
                     spatial_res=64, channels=1, master_seed=0)
BENCH_MIX = DegradationMix(placement="tail")
BENCH_CAMERA = CameraSpec()
BENCH_SEEDS = (1, 2, 3, 4, 5)
BENCH_EPOCHS = 80
BENCH_BATCH = 16
BENCH_LR = 1e-3


def _emit(capsys, ok, label, detail, t0, budget):
    elapsed = time.perf_counter() - t0
    with capsys.disabled():
        print("[%s] %s: %s  [%.1fs / %.0fs]"
              % ("PASS" if ok else "FAIL", label, detail, elapsed, budget),
              flush=True)
    return elapsed


def test_1_gradient_fidelity(capsys):
    """Every analytic gradient matches central finite differences."""
    t0, budget = time.perf_counter(), 30.0
    worst_name, worst = "", 0.0
    for seed in SEEDS:
        checks = dict(gradcheck_battery(seed))
        for modality in ("regular2d", "lf_temporal"):
            errs = gradcheck_model(seed=seed, modality=modality)
            checks["model_" + modality] = max(errs.values())
        for name, err in checks.items():
            if err > worst:
                worst_name, worst = "%s@seed%d" % (name, seed), err
    ok = worst < GRAD_TOL
    elapsed = _emit(capsys, ok, "gradient fidelity",
                    "max rel err %.2e (%s) < %.0e" % (worst, worst_name,
                                                      GRAD_TOL), t0, budget)
    assert ok
    assert elapsed < budget


def test_2_lenslet_representation(capsys):
    """Identity at m=1, exact view recovery, size preservation."""
    t0, budget = time.perf_counter(), 10.0
    rng = np.random.default_rng(42)

    lf = random_lightfield(rng, angular=5, height=12, width=12, channels=2)
    rep = lenslet_transform(lf, macro_size=1)
    central = central_view(lf)
    identity_ok = (rep.pixels.dtype == central.dtype
                   and np.array_equal(rep.pixels, central))

    recovered_ok = True
    for angular in (3, 5, 11):
        for m in (1, 2, 3):
            lf = random_lightfield(rng, angular=angular, height=12, width=12)
            rep = lenslet_transform(lf, macro_size=m)
            block = select_views(angular, m)
            ht, wt = rep.pixels.shape[:2]
            for a in range(m):
                for b in range(m):
                    got = recover_view_subgrid(rep, a, b)
                    want = lf.views[block[a], block[b], 0:ht:m, 0:wt:m]
                    recovered_ok &= np.array_equal(got, want)

    shape_ok = True
    for (h, w), m in (((12, 12), 2), ((13, 14), 2), ((13, 14), 3)):
        lf = random_lightfield(rng, angular=3, height=h, width=w)
        rep = lenslet_transform(lf, macro_size=m)
        shape_ok &= rep.pixels.shape == (h - h % m, w - w % m, 1)

    ok = identity_ok and recovered_ok and shape_ok
    elapsed = _emit(capsys, ok, "lenslet representation",
                    "m=1 identity %s, view recovery %s, trimmed shapes %s"
                    % (identity_ok, recovered_ok, shape_ok), t0, budget)
    assert identity_ok and recovered_ok and shape_ok
    assert elapsed < budget


def test_3_scene_physics(capsys):
    """Parallax, zero-baseline collapse, and label mirror symmetry."""
    t0, budget = time.perf_counter(), 30.0
    scene = SceneSpec()
    cam = CameraSpec(focal_length=64.0, baseline=0.3)
    size = 64

    # Measured disparity between horizontally adjacent views must match
    # focal_length * baseline / depth at three probe rows (three depths).
    lf = render_lightfield(scene, cam, angular_res=3, spatial_res=size)
    worst_px = 0.0
    for row in (36, 40, 44):
        z_cam, _ = ground_depth_at_row(cam, row, size)
        want = cam.focal_length * cam.baseline / z_cam
        left = marking_centroid(
            lf.views[1, 1], row,
            predicted_boundary_col(scene, cam, row, size, size), scene)
        right = marking_centroid(
            lf.views[1, 2], row,
            predicted_boundary_col(scene, cam, row, size, size,
                                   cam_x=cam.baseline), scene)
        worst_px = max(worst_px, abs((left - right) - want))
    disparity_ok = worst_px < 0.5

    flat = render_lightfield(scene, CameraSpec(baseline=0.0), angular_res=3,
                             spatial_res=size)
    collapse_ok = all(
        np.array_equal(flat.views[a, b], flat.views[1, 1])
        for a in range(3) for b in range(3))

    pts = label_to_points(ground_truth_label(scene, cam, spatial_res=size))
    mirror = np.abs(pts[:5, 0] + pts[5:, 0] - 1.0)
    rows_match = np.abs(pts[:5, 1] - pts[5:, 1])
    symmetry_ok = bool(mirror.max() <= 1.0 / size
                       and rows_match.max() <= 1.0 / size)

    ok = disparity_ok and collapse_ok and symmetry_ok
    elapsed = _emit(capsys, ok, "scene physics",
                    "disparity err %.2fpx < 0.5, zero-baseline collapse %s, "
                    "mirror symmetry %s" % (worst_px, collapse_ok,
                                            symmetry_ok), t0, budget)
    assert disparity_ok and collapse_ok and symmetry_ok
    assert elapsed < budget


def test_4_training_sanity(capsys, tmp_path):
    """Overfit probe converges and is bit-reproducible."""
    t0, budget = time.perf_counter(), 300.0
    generate_dataset(tmp_path / "probe", n_sequences=8, frames_per_sequence=6,
                     angular_res=3, spatial_res=32, channels=1, master_seed=0,
                     mix=DegradationMix(fraction=0.0))
    seqs = load_dataset(tmp_path / "probe")["sequences"]
    x, y = load_modality_split([s["manifest_path"] for s in seqs],
                               "lf_temporal")
    config = TrainConfig(modality="lf_temporal", epochs=40, batch_size=4,
                         seed=0, base_lr=3e-4, lr_decay=0.1,
                         lr_decay_every=20)
    first = train_model(x, y, config)
    second = train_model(x, y, config)

    ratio = first.history[-1]["train_loss"] / first.history[0]["train_loss"]
    converged = ratio <= 0.10
    reproducible = first.history == second.history and all(
        np.array_equal(first.params[k], second.params[k])
        for k in first.params)

    ok = converged and reproducible
    elapsed = _emit(capsys, ok, "training sanity",
                    "final/initial loss %.4f <= 0.10, bit-identical rerun %s"
                    % (ratio, reproducible), t0, budget)
    assert converged and reproducible
    assert elapsed < budget


def test_5_modality_ordering(capsys, tmp_path):
    """Median test RMSE: lf_temporal < lf_single < regular2d."""
    t0, budget = time.perf_counter(), 1800.0
    root = tmp_path / "bench"
    info = generate_dataset(root, mix=BENCH_MIX, camera=BENCH_CAMERA,
                            **BENCH_DATASET)
    seqs = load_dataset(root)["sequences"]
    train_seqs, test_seqs = split_dataset(seqs, train_fraction=0.7, seed=0)
    test_manifests = [s["manifest_path"] for s in test_seqs]
    test_names = [s["name"] for s in test_seqs]

    medians = {}
    for modality in ("regular2d", "lf_single", "lf_temporal"):
        x, y = load_modality_split([s["manifest_path"] for s in train_seqs],
                                   modality)
        scores = []
        for seed in BENCH_SEEDS:
            config = TrainConfig(modality=modality, epochs=BENCH_EPOCHS,
                                 batch_size=BENCH_BATCH, seed=seed,
                                 base_lr=BENCH_LR, lr_decay=0.1,
                                 lr_decay_every=BENCH_EPOCHS // 2)
            result = train_model(x, y, config)
            report = evaluate_model(result.params, result.model_config,
                                    test_manifests, test_names,
                                    info["dataset_id"])
            scores.append(report.rmse)
        medians[modality] = float(np.median(scores))

    ok = (medians["lf_temporal"] < medians["lf_single"]
          < medians["regular2d"])
    elapsed = _emit(capsys, ok, "modality ordering",
                    "median RMSE over %d seeds: lf_temporal %.4f < lf_single "
                    "%.4f < regular2d %.4f is %s"
                    % (len(BENCH_SEEDS), medians["lf_temporal"],
                       medians["lf_single"], medians["regular2d"], ok),
                    t0, budget)
    assert ok
    assert elapsed < budget


def test_6_protocol_constants(capsys, tmp_path):
    """Schedule values, split arithmetic, and output head width."""
    t0, budget = time.perf_counter(), 5.0
    schedule = LrSchedule(base_lr=3e-4, decay=0.1, decay_every=20)
    lrs = [lr_at_epoch(schedule, e) for e in (0, 20, 40)]
    schedule_ok = lrs == pytest.approx([3e-4, 3e-5, 3e-6], rel=1e-12)

    info = generate_dataset(tmp_path / "ds", n_sequences=300,
                            frames_per_sequence=1, angular_res=3,
                            spatial_res=16, channels=1, master_seed=7,
                            mix=DegradationMix(fraction=0.0))
    seqs = load_dataset(tmp_path / "ds")["sequences"]
    train_seqs, test_seqs = split_dataset(seqs, train_fraction=0.70, seed=0)
    split_ok = len(test_seqs) == 90 and len(train_seqs) == 210

    x, y = load_modality_split([s["manifest_path"] for s in train_seqs[:8]],
                               "regular2d")
    result = train_model(x, y, TrainConfig(modality="regular2d", epochs=1,
                                           batch_size=8, seed=0))
    report = evaluate_model(result.params, result.model_config,
                            [s["manifest_path"] for s in test_seqs],
                            [s["name"] for s in test_seqs],
                            info["dataset_id"])
    count_ok = report.n_predictions == 90 and len(report.per_sample) == 90

    pred = predict_in_batches(result.params, result.model_config, x[:1])
    head_ok = pred.shape == (1, 20) and LABEL_SIZE == 20

    ok = schedule_ok and split_ok and count_ok and head_ok
    elapsed = _emit(capsys, ok, "protocol constants",
                    "lr steps %s, 300*0.70 split -> 90 test %s, "
                    "n_predictions==90 %s, head width 20 %s"
                    % (schedule_ok, split_ok, count_ok, head_ok), t0, budget)
    assert schedule_ok and split_ok and count_ok and head_ok
    assert elapsed < budget


def test_7_io_round_trips(capsys, tmp_path):
    """Every on-disk format is bit-exact under load(save(x))."""
    t0, budget = time.perf_counter(), 10.0
    rng = np.random.default_rng(11)

    lf = random_lightfield(rng, angular=5, height=12, width=14, channels=2)
    save_lightfield(lf, tmp_path / "x.lfh")
    back = load_lightfield(tmp_path / "x.lfh")
    lf_ok = (np.array_equal(back.views, lf.views)
             and back.views.dtype == lf.views.dtype)

    rep = lenslet_transform(lf, macro_size=2)
    save_lenslet_image(rep, tmp_path / "x.lsh")
    rep_back = load_lenslet_image(tmp_path / "x.lsh")
    rep_ok = (np.array_equal(rep_back.pixels, rep.pixels)
              and rep_back.macro_size == rep.macro_size
              and rep_back.view_block_start == rep.view_block_start
              and rep_back.source_angular_res == rep.source_angular_res)

    ys = np.sort(rng.uniform(0.05, 0.95, 5))[::-1]
    left = np.column_stack([rng.uniform(0.0, 0.4, 5), ys])
    right = np.column_stack([rng.uniform(0.6, 1.0, 5), ys])
    vec = points_to_label(left, right)
    save_label(tmp_path / "x.json", vec, frame=3)
    label_ok = np.array_equal(load_label(tmp_path / "x.json"), vec)

    config = ModelConfig(modality="lf_temporal", in_height=16, in_width=16,
                         in_channels=1, feature_dim=16, lstm_hidden=8,
                         out_dim=LABEL_SIZE)
    params = init_params(config, seed=3)
    save_checkpoint(tmp_path / "x.ckpt", params, config,
                    meta={"epoch": 4, "note": "acceptance"})
    loaded, config_back, _, _, meta = load_checkpoint(tmp_path / "x.ckpt")
    ckpt_ok = (config_back == config and meta == {"epoch": 4,
                                                  "note": "acceptance"}
               and set(loaded) == set(params)
               and all(np.array_equal(loaded[k], params[k])
                       for k in params))

    ok = lf_ok and rep_ok and label_ok and ckpt_ok
    elapsed = _emit(capsys, ok, "io round trips",
                    "lightfield %s, lenslet %s, label %s, checkpoint %s"
                    % (lf_ok, rep_ok, label_ok, ckpt_ok), t0, budget)
    assert lf_ok and rep_ok and label_ok and ckpt_ok
    assert elapsed < budget
