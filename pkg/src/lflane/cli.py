"""Command-line interface.

Every command prints a machine-readable JSON summary to stdout. Exit codes:
0 success, 1 usage error, 2 data or validation error (bad files, bad
arguments that parse but fail checks), 3 numerical failure (diverged
training, failed gradient check).

A JSON file passed with --config supplies per-command defaults; explicit
flags always win. Keys must match the command's option names (dashes as
underscores).
"""

import argparse
import json
import sys

from .container import load_lightfield, save_lenslet_image, save_view_png
from .datagen import DegradationMix, generate_dataset, load_dataset, split_dataset
from .errors import NumericalError, ValidationError
from .lenslet import lenslet_transform
from .metrics import compare, evaluate_model, load_report, save_report
from .model import count_params, gradcheck_model, load_checkpoint
from .nn.gradcheck import gradcheck_battery
from .loader import load_modality_split
from .scene import DEGRADATION_KINDS
from .train import TrainConfig, train_model

GRADCHECK_TOLERANCE = 1e-4


class _Parser(argparse.ArgumentParser):
    """argparse exits with 2 on usage errors; this project reserves 2 for
    data problems, so usage failures exit 1 instead."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _split_args(sub):
    sub.add_argument("--train-fraction", type=float, default=0.7,
                     help="fraction of sequences used for training")
    sub.add_argument("--split-seed", type=int, default=0,
                     help="seed for the train/test sequence shuffle")


def build_parser():
    parser = _Parser(prog="lflane",
                     description="Light-field lane detection toolkit")
    common = _Parser(add_help=False)
    common.add_argument("--seed", type=int, default=0,
                        help="master seed for this command")
    common.add_argument("--config", type=str, default=None,
                        help="JSON file with default values for this command")

    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", parents=[common],
                       help="generate a synthetic light-field dataset")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--sequences", type=int, default=60)
    p.add_argument("--frames", type=int, default=10)
    p.add_argument("--angular", type=int, default=5)
    p.add_argument("--spatial", type=int, default=64)
    p.add_argument("--channels", type=int, default=1)
    p.add_argument("--degraded-fraction", type=float, default=0.5)
    p.add_argument("--kinds", type=str,
                   default="low_light,glare,blur,marking_wear",
                   help="comma-separated degradation kinds")
    p.add_argument("--severity-min", type=float, default=0.5)
    p.add_argument("--severity-max", type=float, default=1.0)
    p.add_argument("--placement", choices=("random", "tail"), default="random",
                   help="degraded frames: scattered or at the sequence tail")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("lenslet", parents=[common],
                       help="interleave a light field into a lenslet image")
    p.add_argument("--input", required=True, help="a .lfh light-field file")
    p.add_argument("--output", required=True, help="destination .lsh file")
    p.add_argument("--macro", type=int, default=2,
                   help="macro-pixel size (views per axis)")
    p.add_argument("--png", default=None,
                   help="also export the lenslet image as a PNG")
    p.set_defaults(func=cmd_lenslet)

    p = sub.add_parser("train", parents=[common],
                       help="train one modality on a dataset")
    p.add_argument("--dataset", required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--modality", required=True,
                   choices=("regular2d", "lf_single", "lf_temporal"))
    p.add_argument("--epochs", type=int, default=12)
    p.add_argument("--batch-size", type=int, default=0,
                   help="0 picks the per-modality default")
    p.add_argument("--base-lr", type=float, default=3e-4)
    p.add_argument("--lr-decay", type=float, default=0.1)
    p.add_argument("--lr-decay-every", type=int, default=20)
    p.add_argument("--macro", type=int, default=2)
    _split_args(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("evaluate", parents=[common],
                       help="score a checkpoint on the held-out sequences")
    p.add_argument("--dataset", required=True)
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--out", required=True, help="report JSON destination")
    _split_args(p)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("compare", parents=[common],
                       help="combine evaluation reports across modalities")
    p.add_argument("reports", nargs="+", help="report JSON files")
    p.add_argument("--out-dir", default=None,
                   help="write comparison.json/.csv/.svg here")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("gradcheck", parents=[common],
                       help="finite-difference check of all gradients")
    p.add_argument("--seeds", type=str, default="1,2,3",
                   help="comma-separated seeds to run")
    p.set_defaults(func=cmd_gradcheck)

    return parser, {name: sp for name, sp in sub.choices.items()}


def cmd_synth(args):
    kinds = tuple(k.strip() for k in args.kinds.split(",") if k.strip())
    for kind in kinds:
        if kind not in DEGRADATION_KINDS or kind == "none":
            raise ValidationError(f"unknown degradation kind {kind!r}")
    mix = DegradationMix(fraction=args.degraded_fraction, kinds=kinds,
                         severity_range=(args.severity_min, args.severity_max),
                         placement=args.placement)
    manifest = generate_dataset(
        args.out_dir, n_sequences=args.sequences,
        frames_per_sequence=args.frames, angular_res=args.angular,
        spatial_res=args.spatial, channels=args.channels,
        master_seed=args.seed, mix=mix,
    )
    return {
        "dataset_id": manifest["dataset_id"],
        "out_dir": args.out_dir,
        "n_sequences": args.sequences,
        "frames_per_sequence": args.frames,
    }


def cmd_lenslet(args):
    lf = load_lightfield(args.input)
    rep = lenslet_transform(lf, macro_size=args.macro)
    save_lenslet_image(rep, args.output)
    if args.png:
        save_view_png(rep.pixels, args.png)
    h, w, c = rep.pixels.shape
    return {
        "input": args.input,
        "output": args.output,
        "macro_size": rep.macro_size,
        "view_block_start": rep.view_block_start,
        "shape": [h, w, c],
    }


def _load_split(args):
    dataset = load_dataset(args.dataset)
    train, test = split_dataset(dataset["sequences"],
                                train_fraction=args.train_fraction,
                                seed=args.split_seed)
    return dataset, train, test


def cmd_train(args):
    dataset, train, test = _load_split(args)
    x_train, y_train = load_modality_split(
        [s["manifest_path"] for s in train], args.modality, args.macro)
    x_val, y_val = load_modality_split(
        [s["manifest_path"] for s in test], args.modality, args.macro,
        final_frame_only=True)
    config = TrainConfig(
        modality=args.modality, epochs=args.epochs, batch_size=args.batch_size,
        seed=args.seed, base_lr=args.base_lr, lr_decay=args.lr_decay,
        lr_decay_every=args.lr_decay_every, macro_size=args.macro,
    )
    result = train_model(x_train, y_train, config, x_val=x_val, y_val=y_val,
                         out_dir=args.out_dir)
    last = result.history[-1]
    return {
        "checkpoint": result.checkpoint_path,
        "history": result.history_path,
        "epochs": config.epochs,
        "param_count": count_params(result.params),
        "final_train_loss": last["train_loss"],
        "final_val_loss": last["val_loss"],
        "dataset_id": dataset["dataset_id"],
    }


def cmd_evaluate(args):
    params, model_config, _, _, meta = load_checkpoint(args.checkpoint)
    macro = int(meta.get("train_config", {}).get("macro_size", 2))
    dataset, _, test = _load_split(args)
    report = evaluate_model(
        params, model_config,
        test_manifests=[s["manifest_path"] for s in test],
        test_names=[s["name"] for s in test],
        dataset_id=dataset["dataset_id"], macro_size=macro,
    )
    save_report(report, args.out)
    doc = report.to_dict()
    doc["report_path"] = args.out
    return doc


def cmd_compare(args):
    reports = [load_report(p) for p in args.reports]
    return compare(reports, out_dir=args.out_dir)


def cmd_gradcheck(args):
    try:
        seeds = [int(s) for s in args.seeds.split(",") if s.strip()]
    except ValueError as exc:
        raise ValidationError(f"bad --seeds value {args.seeds!r}") from exc
    if not seeds:
        raise ValidationError("need at least one seed")
    results = {}
    worst = 0.0
    for seed in seeds:
        errors = dict(gradcheck_battery(seed))
        for modality in ("regular2d", "lf_temporal"):
            model_errors = gradcheck_model(seed, modality=modality)
            errors[f"model_{modality}"] = max(model_errors.values())
        results[str(seed)] = errors
        worst = max(worst, max(errors.values()))
    return {
        "seeds": results,
        "max_error": worst,
        "tolerance": GRADCHECK_TOLERANCE,
        "ok": worst < GRADCHECK_TOLERANCE,
    }


def _find_config(argv, parser):
    """Pre-scan argv for --config so file values become parser defaults."""
    path = None
    for i, tok in enumerate(argv):
        if tok == "--config" and i + 1 < len(argv):
            path = argv[i + 1]
        elif tok.startswith("--config="):
            path = tok.split("=", 1)[1]
    if path is None:
        return
    command = next((tok for tok in argv if not tok.startswith("-")), None)
    try:
        with open(path) as fh:
            values = json.load(fh)
    except OSError as exc:
        raise ValidationError(f"cannot read config file {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ValidationError(f"config file {path} is not valid JSON: {exc}") from exc
    if not isinstance(values, dict):
        raise ValidationError(f"config file {path} must hold a JSON object")
    _, subs = parser
    if command not in subs:
        return
    sub = subs[command]
    dests = {a.dest for a in sub._actions}
    unknown = sorted(set(values) - dests)
    if unknown:
        raise ValidationError(
            f"config file {path} has unknown keys for {command!r}: {unknown}")
    sub.set_defaults(**values)


def run(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    parser, subs = build_parser()
    try:
        _find_config(argv, (parser, subs))
        args = parser.parse_args(argv)
        result = args.func(args)
    except SystemExit as exc:  # argparse usage error (1) or --help (0)
        return exc.code if isinstance(exc.code, int) else 1
    except (ValidationError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return 3
    print(json.dumps(result, sort_keys=True, indent=2))
    if args.command == "gradcheck" and not result["ok"]:
        return 3
    return 0


def main():
    sys.exit(run())
