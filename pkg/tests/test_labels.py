import json

import numpy as np
import pytest

from lflane import (
    LABEL_SIZE,
    ValidationError,
    label_to_points,
    load_label,
    points_to_label,
    save_label,
)


def make_label():
    # near points sit low in the image (large y), far points high
    ys = np.linspace(0.9, 0.3, 5)
    left = np.stack([np.linspace(0.2, 0.4, 5), ys], axis=1)
    right = np.stack([np.linspace(0.8, 0.6, 5), ys], axis=1)
    return left, right


def test_points_round_trip():
    left, right = make_label()
    vec = points_to_label(left, right)
    assert vec.shape == (LABEL_SIZE,)
    pts = label_to_points(vec)
    assert np.allclose(pts[:5], left)
    assert np.allclose(pts[5:], right)


def test_layout_interleaves_x_then_y():
    left, right = make_label()
    vec = points_to_label(left, right)
    assert vec[0] == left[0, 0] and vec[1] == left[0, 1]
    assert vec[10] == right[0, 0] and vec[11] == right[0, 1]


def test_file_round_trip_bit_exact(tmp_path):
    left, right = make_label()
    vec = points_to_label(left, right)
    path = tmp_path / "frame_000.label.json"
    save_label(path, vec, sequence_id="seq_0", frame_index=0)
    back = load_label(path)
    assert np.array_equal(back, vec)
    doc = json.loads(path.read_text())
    assert doc["sequence_id"] == "seq_0"
    assert doc["frame_index"] == 0


def test_rejects_wrong_length():
    with pytest.raises(ValidationError):
        label_to_points(np.zeros(19))


def test_rejects_out_of_range():
    left, right = make_label()
    left[0, 0] = 1.5
    with pytest.raises(ValidationError):
        points_to_label(left, right)


def test_rejects_non_monotone_y():
    left, right = make_label()
    left[2, 1] = left[1, 1]  # ties are not strictly decreasing
    with pytest.raises(ValidationError):
        points_to_label(left, right)


def test_rejects_nan():
    left, right = make_label()
    right[3, 0] = np.nan
    with pytest.raises(ValidationError):
        points_to_label(left, right)


def test_load_missing_file(tmp_path):
    with pytest.raises(FileNotFoundError):
        load_label(tmp_path / "nope.json")


def test_load_missing_key(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"not_label": []}))
    with pytest.raises(ValidationError):
        load_label(path)
