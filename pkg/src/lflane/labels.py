"""Lane label files: 20 normalized coordinates plus metadata, as JSON.

The flattened layout is [xL1, yL1, ..., xL5, yL5, xR1, yR1, ..., xR5, yR5]
with points ordered near to far within each boundary. See
:func:`lflane.validation.check_lane_label` for the invariants.
"""

import json
from pathlib import Path

import numpy as np

from .errors import ValidationError
from .validation import check_lane_label

POINTS_PER_BOUNDARY = 5
LABEL_SIZE = 4 * POINTS_PER_BOUNDARY


def label_to_points(vec) -> np.ndarray:
    """Reshape a 20-vector into (10, 2) points, validating on the way."""
    return check_lane_label(vec).reshape(10, 2)


def points_to_label(left, right) -> np.ndarray:
    """Flatten two (5, 2) near-to-far boundary point arrays into a label."""
    pts = np.concatenate([np.asarray(left, dtype=np.float64).reshape(5, 2),
                          np.asarray(right, dtype=np.float64).reshape(5, 2)])
    return check_lane_label(pts.reshape(-1))


def save_label(path, vec, **metadata) -> None:
    vec = check_lane_label(vec)
    doc = {"label": [float(v) for v in vec]}
    doc.update(metadata)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")


def load_label(path) -> np.ndarray:
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"label file not found: {path}")
    doc = json.loads(path.read_text())
    if "label" not in doc:
        raise ValidationError(f"{path}: label file missing 'label' array")
    return check_lane_label(doc["label"], name=str(path))
