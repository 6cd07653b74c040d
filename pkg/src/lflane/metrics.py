"""RMSE evaluation and cross-modality comparison.

Every modality is scored on the same protocol: one prediction per held-out
sequence, made from that sequence's final frame (the temporal model also
sees the frames before it), against the final frame's label. Reports carry
the dataset id and a signature of the exact test split, and compare()
refuses to mix reports generated under different data.
"""

import csv
import hashlib
import json
import os
from dataclasses import asdict, dataclass

import numpy as np

from .errors import ValidationError
from .loader import load_modality_split
from .train import predict_in_batches

EXPECTED_ORDER = ("lf_temporal", "lf_single", "regular2d")  # best to worst


def rmse(pred, target) -> float:
    """Root mean squared error over every coordinate of every sample."""
    pred = np.asarray(pred, dtype=np.float64)
    target = np.asarray(target, dtype=np.float64)
    if pred.shape != target.shape:
        raise ValidationError(
            f"prediction shape {pred.shape} != target shape {target.shape}")
    return float(np.sqrt(np.mean((pred - target) ** 2)))


def split_signature(dataset_id: str, test_names) -> str:
    digest = hashlib.sha256(
        (dataset_id + ":" + ",".join(sorted(test_names))).encode())
    return digest.hexdigest()[:12]


@dataclass(frozen=True)
class EvalReport:
    """One modality's score on one test split.

    per_sample holds each sequence's mean squared error over the 20 label
    coordinates, so rmse == sqrt(mean(per_sample)).
    """

    modality: str
    dataset_id: str
    split_signature: str
    n_predictions: int
    rmse: float
    per_sample: tuple
    macro_size: int = 2

    def to_dict(self) -> dict:
        doc = asdict(self)
        doc["per_sample"] = list(self.per_sample)
        return doc


def evaluate_model(params, model_config, test_manifests, test_names,
                   dataset_id: str, macro_size: int = 2) -> EvalReport:
    """Score a trained model on held-out sequences (final-frame protocol)."""
    if len(test_manifests) != len(test_names):
        raise ValidationError("manifest and name lists differ in length")
    x, y = load_modality_split(test_manifests, model_config.modality,
                               macro_size=macro_size, final_frame_only=True)
    pred = predict_in_batches(params, model_config, x)
    per_sample = np.mean((pred - y) ** 2, axis=1)
    return EvalReport(
        modality=model_config.modality,
        dataset_id=dataset_id,
        split_signature=split_signature(dataset_id, test_names),
        n_predictions=len(test_names),
        rmse=float(np.sqrt(per_sample.mean())),
        per_sample=tuple(float(v) for v in per_sample),
        macro_size=macro_size,
    )


def save_report(report: EvalReport, path) -> None:
    with open(path, "w") as fh:
        json.dump(report.to_dict(), fh, sort_keys=True, indent=2)
        fh.write("\n")


def load_report(path) -> EvalReport:
    if not os.path.isfile(path):
        raise FileNotFoundError(f"no evaluation report at {path}")
    with open(path) as fh:
        doc = json.load(fh)
    try:
        return EvalReport(
            modality=doc["modality"],
            dataset_id=doc["dataset_id"],
            split_signature=doc["split_signature"],
            n_predictions=int(doc["n_predictions"]),
            rmse=float(doc["rmse"]),
            per_sample=tuple(float(v) for v in doc["per_sample"]),
            macro_size=int(doc.get("macro_size", 2)),
        )
    except KeyError as exc:
        raise ValidationError(f"{path}: report missing field {exc}") from exc


def compare(reports, out_dir=None) -> dict:
    """Combine per-modality reports into one comparison.

    All reports must share dataset_id and split_signature. When all three
    modalities are present, the summary records whether the expected quality
    ordering (lf_temporal < lf_single < regular2d) holds. With out_dir set,
    writes comparison.json, comparison.csv, and comparison.svg.
    """
    if len(reports) < 2:
        raise ValidationError("compare needs at least two reports")
    first = reports[0]
    seen = set()
    for rep in reports:
        if (rep.dataset_id, rep.split_signature) != (first.dataset_id,
                                                     first.split_signature):
            raise ValidationError(
                "reports come from different datasets or test splits; "
                "refusing to compare")
        if rep.modality in seen:
            raise ValidationError(f"duplicate report for {rep.modality!r}")
        seen.add(rep.modality)

    scores = {rep.modality: rep.rmse for rep in reports}
    summary = {
        "dataset_id": first.dataset_id,
        "split_signature": first.split_signature,
        "n_predictions": first.n_predictions,
        "rmse": scores,
        "ranking": sorted(scores, key=scores.get),
    }
    if all(m in scores for m in EXPECTED_ORDER):
        summary["expected_order"] = list(EXPECTED_ORDER)
        summary["expected_order_holds"] = (
            scores["lf_temporal"] < scores["lf_single"] < scores["regular2d"])

    if out_dir is not None:
        os.makedirs(out_dir, exist_ok=True)
        with open(os.path.join(out_dir, "comparison.json"), "w") as fh:
            json.dump(summary, fh, sort_keys=True, indent=2)
            fh.write("\n")
        with open(os.path.join(out_dir, "comparison.csv"), "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["modality", "rmse", "n_predictions"])
            for rep in sorted(reports, key=lambda r: r.rmse):
                writer.writerow([rep.modality, f"{rep.rmse:.17g}",
                                 rep.n_predictions])
        with open(os.path.join(out_dir, "comparison.svg"), "w") as fh:
            fh.write(_bar_chart_svg(scores))
    return summary


def _bar_chart_svg(scores: dict) -> str:
    """A dependency-free bar chart of RMSE per modality."""
    width, height = 480, 300
    margin, base = 50, 250
    plot_h = 190
    names = sorted(scores, key=scores.get)
    top = max(scores.values()) or 1.0
    slot = (width - 2 * margin) // max(len(names), 1)
    bar_w = int(slot * 0.6)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" '
        f'height="{height}" viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        '<text x="50%" y="28" text-anchor="middle" font-family="sans-serif" '
        'font-size="16">Lane RMSE by input modality</text>',
        f'<line x1="{margin}" y1="{base}" x2="{width - margin}" y2="{base}" '
        'stroke="black"/>',
    ]
    for i, name in enumerate(names):
        h = max(2, int(round(plot_h * scores[name] / top)))
        x = margin + i * slot + (slot - bar_w) // 2
        y = base - h
        parts.append(f'<rect x="{x}" y="{y}" width="{bar_w}" height="{h}" '
                     'fill="#4878a8"/>')
        parts.append(f'<text x="{x + bar_w // 2}" y="{y - 6}" '
                     'text-anchor="middle" font-family="sans-serif" '
                     f'font-size="12">{scores[name]:.4f}</text>')
        parts.append(f'<text x="{x + bar_w // 2}" y="{base + 18}" '
                     'text-anchor="middle" font-family="sans-serif" '
                     f'font-size="12">{name}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
