#!/usr/bin/env python3
"""Hyperparameter robustness sweep.

Trains one modality across a grid of learning rates and batch sizes and
reports the spread of held-out RMSEs, to check how sensitive the result is
to the training configuration. This is an exploration harness, not a test.

Example:
    python3 scripts/robustness_sweep.py --dataset /tmp/ds \
        --modality lf_single --epochs 30 --lrs 3e-4,1e-3 --batch-sizes 8,16
"""

import argparse
import itertools
import json
import sys
import time

import numpy as np

from lflane import TrainConfig, load_dataset, rmse, split_dataset, train_model
from lflane.loader import load_modality_split
from lflane.train import predict_in_batches


def parse_args(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--dataset", required=True)
    parser.add_argument("--modality", default="lf_single",
                        choices=("regular2d", "lf_single", "lf_temporal"))
    parser.add_argument("--epochs", type=int, default=30)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--train-fraction", type=float, default=0.7)
    parser.add_argument("--split-seed", type=int, default=0)
    parser.add_argument("--lrs", default="1e-4,3e-4,1e-3",
                        help="comma-separated learning rates")
    parser.add_argument("--batch-sizes", default="8,16",
                        help="comma-separated batch sizes")
    parser.add_argument("--out", default=None, help="optional JSON destination")
    return parser.parse_args(argv)


def main(argv=None) -> int:
    args = parse_args(argv)
    lrs = [float(v) for v in args.lrs.split(",") if v.strip()]
    batch_sizes = [int(v) for v in args.batch_sizes.split(",") if v.strip()]

    dataset = load_dataset(args.dataset)
    train, test = split_dataset(dataset["sequences"],
                                train_fraction=args.train_fraction,
                                seed=args.split_seed)
    x_tr, y_tr = load_modality_split(
        [s["manifest_path"] for s in train], args.modality)
    x_te, y_te = load_modality_split(
        [s["manifest_path"] for s in test], args.modality,
        final_frame_only=True)

    rows = []
    for lr, bs in itertools.product(lrs, batch_sizes):
        config = TrainConfig(modality=args.modality, epochs=args.epochs,
                             batch_size=bs, seed=args.seed, base_lr=lr,
                             lr_decay_every=max(args.epochs // 2, 1))
        t0 = time.time()
        result = train_model(x_tr, y_tr, config)
        pred = predict_in_batches(result.params, result.model_config, x_te)
        score = rmse(pred, y_te)
        rows.append({"base_lr": lr, "batch_size": bs, "rmse": score,
                     "final_train_loss": result.final_train_loss,
                     "seconds": round(time.time() - t0, 1)})
        print(f"lr={lr:<8g} batch={bs:<3d} rmse={score:.4f} "
              f"({rows[-1]['seconds']}s)", flush=True)

    scores = [row["rmse"] for row in rows]
    summary = {
        "dataset_id": dataset["dataset_id"],
        "modality": args.modality,
        "epochs": args.epochs,
        "runs": rows,
        "rmse_min": min(scores),
        "rmse_max": max(scores),
        "rmse_spread": max(scores) - min(scores),
    }
    print(f"spread: {summary['rmse_spread']:.4f} "
          f"(min {summary['rmse_min']:.4f}, max {summary['rmse_max']:.4f})")
    if args.out:
        with open(args.out, "w") as fh:
            json.dump(summary, fh, sort_keys=True, indent=2)
            fh.write("\n")
    return 0


if __name__ == "__main__":
    sys.exit(main())
