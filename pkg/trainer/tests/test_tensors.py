from __future__ import annotations

import json
import struct

import numpy as np
import pytest

import tssi_trainer as tt
from tssi_trainer.tensors import HEADER, MAGIC, load_split


def write_raw(path, array: np.ndarray) -> None:
    h, w, c = array.shape
    path.write_bytes(HEADER.pack(MAGIC, 1, h, w, c) + array.astype("<f4").tobytes())


def test_read_tensor_bit_exact(tmp_path):
    rng = np.random.default_rng(0)
    data = rng.random((12, 135, 3), dtype=np.float32)
    path = tmp_path / "x.tssi"
    write_raw(path, data)
    assert np.array_equal(tt.read_tensor(path), data)


def test_read_tensor_rejects_bad_magic(tmp_path):
    path = tmp_path / "x.tssi"
    path.write_bytes(b"XXXX" + bytes(12) + bytes(12))
    with pytest.raises(tt.TensorFormatError):
        tt.read_tensor(path)


def test_read_tensor_rejects_bad_version(tmp_path):
    path = tmp_path / "x.tssi"
    path.write_bytes(HEADER.pack(MAGIC, 9, 1, 1, 3) + bytes(12))
    with pytest.raises(tt.TensorFormatError):
        tt.read_tensor(path)


def test_read_tensor_rejects_dim_mismatch(tmp_path):
    path = tmp_path / "x.tssi"
    path.write_bytes(HEADER.pack(MAGIC, 1, 2, 2, 3) + bytes(8))  # payload too short
    with pytest.raises(tt.TensorFormatError):
        tt.read_tensor(path)


def test_read_tensor_rejects_truncated_header(tmp_path):
    path = tmp_path / "x.tssi"
    path.write_bytes(b"TS")
    with pytest.raises(tt.TensorFormatError):
        tt.read_tensor(path)


def test_load_split_groups_and_permutes(tmp_path):
    rng = np.random.default_rng(1)
    arrays = {}
    labels = {}
    for name, label in [("a.tssi", 0), ("a_aug1.tssi", 0), ("b.tssi", 1), ("c.tssi", 0)]:
        arr = rng.random((8, 5, 3), dtype=np.float32)
        write_raw(tmp_path / name, arr)
        arrays[name] = arr
        labels[name] = label
    (tmp_path / "labels.json").write_text(json.dumps(labels))
    split_map = {"a": "train", "b": "train", "c": "val"}

    train = load_split(tmp_path, split_map, "train")
    assert train.files == ["a.tssi", "a_aug1.tssi", "b.tssi"]
    assert train.images.shape == (3, 3, 8, 5)  # channels-first
    assert train.labels.tolist() == [0, 0, 1]
    assert np.array_equal(train.images[0].permute(1, 2, 0).numpy(), arrays["a.tssi"])

    plain = load_split(tmp_path, split_map, "train", include_augmented=False)
    assert plain.files == ["a.tssi", "b.tssi"]

    val = load_split(tmp_path, split_map, "val")
    assert val.files == ["c.tssi"]


def test_load_split_missing_split_raises(tmp_path):
    (tmp_path / "labels.json").write_text("{}")
    with pytest.raises(ValueError):
        load_split(tmp_path, {}, "train")


def test_split_map_from_manifest(tmp_path):
    payload = {
        "items": [
            {"sample_id": "a", "split": "train", "keypoints_path": "a.jsonl", "label": 0},
            {"sample_id": "b", "split": "test", "keypoints_path": "b.jsonl", "label": 1},
        ]
    }
    path = tmp_path / "m.json"
    path.write_text(json.dumps(payload))
    assert tt.split_map_from_manifest(path) == {"a": "train", "b": "test"}


def test_roundtrip_against_encoder_output(synthetic_dataset):
    manifest, encoded = synthetic_dataset
    split_map = tt.split_map_from_manifest(manifest)
    train = load_split(encoded, split_map, "train")
    assert train.images.shape[1] == 3
    assert train.images.shape[3] == 135
    assert train.images.min() >= 0.0 and train.images.max() <= 1.0
    # blue channel is zeroed by the encoder's default policy
    assert float(train.images[:, 2].abs().max()) == 0.0
