from __future__ import annotations

import io
import math

import numpy as np
import pytest
from PIL import Image

import tssi
from tssi.encode import HEADER_SIZE, TssiImage
from tssi.topology import JointDescriptor, SkeletonGraph

from conftest import make_sequence


def bilinear_rows_oracle(data: list, new_t: int) -> list:
    """Independent align-corners bilinear resize over nested Python lists."""
    t, w = len(data), len(data[0])
    out = []
    for r in range(new_t):
        pos = 0.0 if (new_t == 1 or t == 1) else r * (t - 1) / (new_t - 1)
        lo = min(math.floor(pos), t - 1)
        hi = min(lo + 1, t - 1)
        f = pos - lo
        row = []
        for c in range(w):
            row.append(
                [(1.0 - f) * data[lo][c][ch] + f * data[hi][c][ch] for ch in range(3)]
            )
        out.append(row)
    return out


def column_image(values: list[float]) -> TssiImage:
    """Single-column image whose rows carry ``values`` in every channel."""
    arr = np.array(values, dtype=np.float32).reshape(-1, 1, 1)
    return TssiImage(data=np.repeat(arr, 3, axis=2))


def chain_graph(names: list[str]) -> SkeletonGraph:
    joints = tuple(JointDescriptor(i, n, "body", i) for i, n in enumerate(names))
    edges = tuple((i - 1, i) for i in range(1, len(names)))
    return SkeletonGraph(joints=joints, edges=edges, root=0)


@pytest.fixture(scope="module")
def standard_order():
    return tssi.euler_traversal(tssi.build_default_graph("standard68"))


def test_assemble_shape_and_zero_blue(standard_order):
    pre = tssi.preprocess(make_sequence(10), "passthrough")
    img = tssi.assemble(pre, standard_order, "zero_z")
    assert img.data.shape == (10, 135, 3)
    assert np.all(img.data[:, :, 2] == 0.0)
    assert img.data[:, :, :2].min() >= 0.0 and img.data[:, :, :2].max() <= 1.0


def test_assemble_duplicates_repeated_joints():
    graph = chain_graph(["mid_shoulders", "nose", "left_shoulder"])
    order = tssi.euler_traversal(graph)
    assert order.path == (0, 1, 2, 1, 0)
    pose = {
        "mid_shoulders": np.array([0.5, 0.5, 0.0]),
        "nose": np.array([0.2, 0.7, 0.0]),
        "left_shoulder": np.array([0.4, 0.5, 0.0]),
    }
    frame = tssi.KeypointFrame(0, pose, np.zeros((20, 3)), np.zeros((21, 3)), np.zeros((21, 3)))
    pre = tssi.PreprocessedSequence(frames=(frame, frame))
    img = tssi.assemble(pre, order, "zero_z")
    for row in img.data:
        assert np.allclose(row[1], [0.2, 0.7, 0.0])
        assert np.allclose(row[3], [0.2, 0.7, 0.0])


def test_assemble_pixel_lookup(standard_order):
    pre = tssi.preprocess(make_sequence(4, seed=3), "passthrough")
    img = tssi.assemble(pre, standard_order, "zero_z")
    joints = standard_order.joints
    face_ids = [j.id for j in joints if j.part == "face"]
    col = standard_order.path.index(face_ids[2])
    expected = pre.frames[1].face[2]
    assert np.allclose(img.data[1, col, :2], expected[:2], atol=1e-7)


def test_assemble_keep_z_minmax(standard_order):
    pre = tssi.preprocess(make_sequence(6, seed=4), "passthrough")
    img = tssi.assemble(pre, standard_order, "keep_z_minmax")
    z = img.data[:, :, 2]
    assert z.min() == 0.0 and z.max() == 1.0


def test_assemble_keep_z_degenerate_maps_to_half(standard_order):
    pre = tssi.preprocess(make_sequence(3, seed=5), "passthrough")
    flat = []
    for f in pre.frames:
        blocks = {p: f.block(p).copy() for p in ("face", "left_hand", "right_hand")}
        pose = {k: v.copy() for k, v in f.pose.items()}
        for b in blocks.values():
            b[:, 2] = 0.25
        for v in pose.values():
            v[2] = 0.25
        flat.append(tssi.KeypointFrame(f.frame_index, pose, blocks["face"],
                                       blocks["left_hand"], blocks["right_hand"]))
    img = tssi.assemble(tssi.PreprocessedSequence(frames=tuple(flat)), standard_order, "keep_z_minmax")
    assert np.all(img.data[:, :, 2] == 0.5)


def test_assemble_rejects_empty_inputs(standard_order):
    with pytest.raises(tssi.EmptySequence):
        tssi.assemble(tssi.PreprocessedSequence(frames=()), standard_order)
    pre = tssi.preprocess(make_sequence(2), "passthrough")
    empty = tssi.JointOrder(path=(), joints=standard_order.joints)
    with pytest.raises(tssi.EmptyOrder):
        tssi.assemble(pre, empty)


def test_resize_two_to_three_rows():
    img = column_image([0.0, 1.0])
    out = tssi.resize_rows(img, 3)
    assert np.allclose(out.data[:, 0, 0], [0.0, 0.5, 1.0])


def test_resize_four_to_two_rows():
    img = column_image([0.0, 0.3, 0.9, 0.6])
    out = tssi.resize_rows(img, 2)
    assert np.allclose(out.data[:, 0, 0], [0.0, 0.6])


def test_resize_same_size_is_bit_identical():
    rng = np.random.default_rng(6)
    img = TssiImage(data=rng.random((17, 9, 3), dtype=np.float32))
    out = tssi.resize_rows(img, 17)
    assert np.array_equal(out.data, img.data)


def test_resize_to_single_row_takes_row_zero():
    rng = np.random.default_rng(7)
    img = TssiImage(data=rng.random((5, 4, 3), dtype=np.float32))
    out = tssi.resize_rows(img, 1)
    assert np.array_equal(out.data[0], img.data[0])


def test_resize_matches_oracle_on_random_images():
    rng = np.random.default_rng(8)
    for _ in range(40):
        t = int(rng.integers(1, 33))
        w = int(rng.integers(1, 12))
        data = rng.random((t, w, 3), dtype=np.float32)
        new_t = int(rng.integers(1, 4 * t + 1))
        got = tssi.resize_rows(TssiImage(data=data), new_t).data
        want = np.array(bilinear_rows_oracle(data.tolist(), new_t), dtype=np.float64)
        assert got.shape == (new_t, w, 3)
        assert np.abs(got.astype(np.float64) - want).max() < 1e-6


def test_fit_height_pads_bottom_with_zeros():
    rng = np.random.default_rng(9)
    img = TssiImage(data=rng.uniform(0.1, 1.0, (40, 6, 3)).astype(np.float32))
    out = tssi.fit_height(img, 64)
    assert out.data.shape == (64, 6, 3)
    assert np.array_equal(out.data[:40], img.data)
    assert np.all(out.data[40:] == 0.0)


def test_fit_height_identity():
    rng = np.random.default_rng(10)
    img = TssiImage(data=rng.random((64, 5, 3), dtype=np.float32))
    assert tssi.fit_height(img, 64) is img


def test_fit_height_shrinks_via_resize():
    rng = np.random.default_rng(11)
    img = TssiImage(data=rng.random((128, 4, 3), dtype=np.float32))
    out = tssi.fit_height(img, 64)
    want = np.array(bilinear_rows_oracle(img.data.tolist(), 64), dtype=np.float64)
    assert np.abs(out.data.astype(np.float64) - want).max() < 1e-6


def test_raw_f32_roundtrip_and_byte_count():
    rng = np.random.default_rng(12)
    img = TssiImage(data=rng.random((10, 135, 3), dtype=np.float32))
    buf = io.BytesIO()
    n = tssi.export(img, "raw_f32", buf)
    assert n == HEADER_SIZE + 10 * 135 * 3 * 4
    assert HEADER_SIZE == 16
    buf.seek(0)
    back = tssi.read_raw(buf)
    assert np.array_equal(back.data, img.data)


def test_raw_f32_file_roundtrip(tmp_path):
    rng = np.random.default_rng(13)
    img = TssiImage(data=rng.random((7, 9, 3), dtype=np.float32))
    path = tmp_path / "img.tssi"
    n = tssi.export(img, "raw_f32", path)
    assert path.stat().st_size == n
    assert np.array_equal(tssi.read_raw(path).data, img.data)


def test_read_raw_rejects_bad_magic():
    blob = b"NOPE" + bytes(12) + bytes(12)
    with pytest.raises(tssi.ParseError):
        tssi.read_raw(io.BytesIO(blob))


def test_read_raw_rejects_bad_version():
    img = TssiImage(data=np.zeros((1, 1, 3), dtype=np.float32))
    buf = io.BytesIO()
    tssi.export(img, "raw_f32", buf)
    raw = bytearray(buf.getvalue())
    raw[4] = 99
    with pytest.raises(tssi.SchemaVersionMismatch):
        tssi.read_raw(io.BytesIO(bytes(raw)))


def test_read_raw_rejects_truncated_payload():
    img = TssiImage(data=np.zeros((2, 3, 3), dtype=np.float32))
    buf = io.BytesIO()
    tssi.export(img, "raw_f32", buf)
    with pytest.raises(tssi.ParseError):
        tssi.read_raw(io.BytesIO(buf.getvalue()[:-4]))


def test_png_preview_rounds_half_up(tmp_path):
    img = TssiImage(data=np.full((2, 2, 3), 0.5, dtype=np.float32))
    path = tmp_path / "img.png"
    tssi.export(img, "png_preview", path)
    pixels = np.asarray(Image.open(path))
    assert pixels.shape == (2, 2, 3)
    assert np.all(pixels == 128)


def test_png_preview_clamps(tmp_path):
    data = np.zeros((1, 2, 3), dtype=np.float32)
    data[0, 0] = [-0.5, 2.0, 1.0]
    path = tmp_path / "img.png"
    tssi.export(TssiImage(data=data), "png_preview", path)
    pixels = np.asarray(Image.open(path))
    assert list(pixels[0, 0]) == [0, 255, 255]


def test_assemble_differs_when_any_coordinate_differs(standard_order):
    pre = tssi.preprocess(make_sequence(4, seed=14), "passthrough")
    base = tssi.assemble(pre, standard_order, "zero_z")
    frames = list(pre.frames)
    face = frames[2].face.copy()
    face[5, 1] += 1e-3
    frames[2] = tssi.KeypointFrame(frames[2].frame_index, frames[2].pose, face,
                                   frames[2].left_hand, frames[2].right_hand)
    other = tssi.assemble(tssi.PreprocessedSequence(frames=tuple(frames)), standard_order, "zero_z")
    assert not np.array_equal(base.data, other.data)
