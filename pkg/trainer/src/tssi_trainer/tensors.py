"""Ingestion of raw_f32 tensor files and encoded dataset directories.

The encoder's wire format: magic ``TSSI`` (4 bytes), then format version,
height, width, and channel count as little-endian u16, then 4 reserved
bytes, then height*width*channels IEEE-754 float32 values in row-major
order. This module parses it bit-exactly and refuses anything whose
header does not match.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import torch

MAGIC = b"TSSI"
FORMAT_VERSION = 1
HEADER = struct.Struct("<4sHHHH4x")

LABELS_FILENAME = "labels.json"


class TensorFormatError(ValueError):
    """Raised for corrupted or unsupported raw tensor files."""


def read_tensor(path: str | Path) -> np.ndarray:
    """Read one raw_f32 file into a float32 array of shape (H, W, C)."""
    blob = Path(path).read_bytes()
    if len(blob) < HEADER.size:
        raise TensorFormatError(f"{path}: file shorter than the {HEADER.size}-byte header")
    magic, version, h, w, c = HEADER.unpack(blob[: HEADER.size])
    if magic != MAGIC:
        raise TensorFormatError(f"{path}: bad magic {magic!r}")
    if version != FORMAT_VERSION:
        raise TensorFormatError(f"{path}: unsupported format version {version}")
    expected = h * w * c * 4
    if len(blob) - HEADER.size != expected:
        raise TensorFormatError(
            f"{path}: payload holds {len(blob) - HEADER.size} bytes, header promises {expected}"
        )
    data = np.frombuffer(blob, dtype="<f4", offset=HEADER.size)
    return np.array(data, dtype=np.float32).reshape(h, w, c)


@dataclass
class TensorDatasetSplit:
    """One split of an encoded dataset, as channels-first torch tensors."""

    images: torch.Tensor  # (N, C, H, W) float32
    labels: torch.Tensor  # (N,) int64
    files: list[str]

    def __len__(self) -> int:
        return int(self.labels.shape[0])


def _sample_id(filename: str) -> str:
    stem = filename.rsplit(".", 1)[0]
    base, _, tail = stem.rpartition("_aug")
    if base and tail.isdigit():
        return base
    return stem


def load_split(
    encoded_dir: str | Path,
    split_of_sample: dict[str, str],
    split: str,
    include_augmented: bool = True,
) -> TensorDatasetSplit:
    """Load every tensor of one split from an encoded output directory.

    ``split_of_sample`` maps sample ids to their split, as recorded in the
    dataset manifest. Augmented copies (``*_augN.tssi``) follow their base
    sample's split and can be excluded for evaluation-style loads.
    """
    encoded_dir = Path(encoded_dir)
    labels_path = encoded_dir / LABELS_FILENAME
    index: dict[str, int] = json.loads(labels_path.read_text())

    chosen: list[tuple[str, int]] = []
    for filename, label in sorted(index.items()):
        sid = _sample_id(filename)
        if split_of_sample.get(sid) != split:
            continue
        if not include_augmented and "_aug" in filename:
            continue
        chosen.append((filename, int(label)))
    if not chosen:
        raise ValueError(f"no tensors for split {split!r} under {encoded_dir}")

    arrays = [read_tensor(encoded_dir / name) for name, _ in chosen]
    shapes = {a.shape for a in arrays}
    if len(shapes) != 1:
        raise ValueError(f"tensors disagree on shape: {sorted(shapes)}")
    stacked = np.stack(arrays)  # (N, H, W, C)
    images = torch.from_numpy(stacked).permute(0, 3, 1, 2).contiguous()
    labels = torch.tensor([label for _, label in chosen], dtype=torch.int64)
    return TensorDatasetSplit(images=images, labels=labels, files=[n for n, _ in chosen])


def split_map_from_manifest(manifest_path: str | Path) -> dict[str, str]:
    """Sample id -> split, read from the encoder's manifest document."""
    payload = json.loads(Path(manifest_path).read_text())
    return {item["sample_id"]: item["split"] for item in payload.get("items", [])}
