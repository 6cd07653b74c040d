import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lflane import (
    ValidationError,
    lenslet_transform,
    load_lenslet_image,
    load_lightfield,
    load_sequence,
    save_lenslet_image,
    save_lightfield,
    save_sequence_manifest,
    save_view_png,
)
from lflane.container import read_sequence_manifest

from conftest import random_lightfield


@settings(max_examples=20, deadline=None)
@given(
    angular=st.sampled_from([1, 3, 5]),
    height=st.integers(1, 9),
    width=st.integers(1, 9),
    channels=st.sampled_from([1, 3]),
    seed=st.integers(0, 10_000),
)
def test_lightfield_round_trip_bit_exact(tmp_path_factory, angular, height,
                                         width, channels, seed):
    rng = np.random.default_rng(seed)
    lf = random_lightfield(rng, angular, height, width, channels)
    path = tmp_path_factory.mktemp("rt") / "field.lfh"
    save_lightfield(lf, path)
    back = load_lightfield(path)
    assert back.views.dtype == np.float32
    assert np.array_equal(back.views, lf.views)


def test_header_is_text_and_blob_separate(tmp_path, tiny_lf):
    path = tmp_path / "x.lfh"
    save_lightfield(tiny_lf, path, sequence_id="seq_0", frame_index=4)
    text = path.read_text()
    assert "angular_res: 3" in text
    assert "dtype: f32" in text
    assert "layout: uvyxc" in text
    assert "sequence_id: seq_0" in text
    assert (tmp_path / "x.lfb").exists()
    blob = (tmp_path / "x.lfb").read_bytes()
    assert len(blob) == tiny_lf.views.size * 4
    # blob is little-endian f32 in header order
    vals = np.frombuffer(blob, dtype="<f4").reshape(tiny_lf.views.shape)
    assert np.array_equal(vals, tiny_lf.views)


def test_lenslet_round_trip_preserves_metadata(tmp_path, rng):
    lf = random_lightfield(rng, angular=5, height=8, width=8)
    rep = lenslet_transform(lf, macro_size=2)
    path = tmp_path / "rep.lsh"
    save_lenslet_image(rep, path)
    back = load_lenslet_image(path)
    assert np.array_equal(back.pixels, rep.pixels)
    assert back.macro_size == rep.macro_size
    assert back.view_block_start == rep.view_block_start
    assert back.source_angular_res == rep.source_angular_res


def test_truncated_blob_is_an_error(tmp_path, tiny_lf):
    path = tmp_path / "x.lfh"
    save_lightfield(tiny_lf, path)
    blob_path = tmp_path / "x.lfb"
    blob_path.write_bytes(blob_path.read_bytes()[:-4])
    with pytest.raises(ValidationError):
        load_lightfield(path)


def test_missing_header_key_is_an_error(tmp_path, tiny_lf):
    path = tmp_path / "x.lfh"
    save_lightfield(tiny_lf, path)
    lines = [l for l in path.read_text().splitlines()
             if not l.startswith("width")]
    path.write_text("\n".join(lines) + "\n")
    with pytest.raises(ValidationError):
        load_lightfield(path)


def test_wrong_dtype_is_an_error(tmp_path, tiny_lf):
    path = tmp_path / "x.lfh"
    save_lightfield(tiny_lf, path)
    path.write_text(path.read_text().replace("dtype: f32", "dtype: f64"))
    with pytest.raises(ValidationError):
        load_lightfield(path)


def test_out_of_range_blob_is_an_error(tmp_path, tiny_lf):
    path = tmp_path / "x.lfh"
    save_lightfield(tiny_lf, path)
    blob_path = tmp_path / "x.lfb"
    vals = np.frombuffer(blob_path.read_bytes(), dtype="<f4").copy()
    vals[0] = 2.0
    blob_path.write_bytes(vals.tobytes())
    with pytest.raises(ValidationError):
        load_lightfield(path)


def test_missing_file_raises_filenotfound(tmp_path):
    with pytest.raises(FileNotFoundError):
        load_lightfield(tmp_path / "absent.lfh")


def test_sequence_manifest_round_trip(tmp_path, rng):
    frames = []
    for i in range(3):
        lf = random_lightfield(rng, angular=3, height=6, width=6)
        p = tmp_path / f"frame_{i}.lfh"
        save_lightfield(lf, p, sequence_id="seq_7", frame_index=i)
        frames.append(p)
    manifest = tmp_path / "manifest.json"
    save_sequence_manifest(manifest, "seq_7", frames, frame_interval=0.5)
    doc = read_sequence_manifest(manifest)
    assert doc["sequence_id"] == "seq_7"
    assert doc["frame_interval"] == 0.5
    seq = load_sequence(manifest)
    assert len(seq) == 3
    assert seq.sequence_id == "seq_7"


def test_sequence_rejects_mixed_dimensions(tmp_path, rng):
    a = random_lightfield(rng, angular=3, height=6, width=6)
    b = random_lightfield(rng, angular=3, height=4, width=6)
    pa, pb = tmp_path / "a.lfh", tmp_path / "b.lfh"
    save_lightfield(a, pa)
    save_lightfield(b, pb)
    manifest = tmp_path / "manifest.json"
    save_sequence_manifest(manifest, "seq_bad", [pa, pb])
    with pytest.raises(ValidationError):
        load_sequence(manifest)


def test_view_png_export(tmp_path, rng):
    lf = random_lightfield(rng, angular=3, height=6, width=6, channels=3)
    out = tmp_path / "view.png"
    save_view_png(lf.views[1, 1], out)
    assert out.stat().st_size > 0
