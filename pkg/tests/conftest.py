"""Shared fixture builders for synthetic keypoint data."""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np
import pytest

from tssi.sequence import POSE_LANDMARKS, KeypointFrame, SkeletonSequence
from tssi.dataset import write_keypoints


def make_pose(rng: np.random.Generator) -> dict[str, np.ndarray]:
    return {name: rng.uniform(0.2, 0.8, 3) for name in POSE_LANDMARKS}


def make_frame(
    index: int,
    rng: np.random.Generator,
    *,
    pose: bool = True,
    face: bool = True,
    left_hand: bool = True,
    right_hand: bool = True,
) -> KeypointFrame:
    return KeypointFrame(
        frame_index=index,
        pose=make_pose(rng) if pose else None,
        face=rng.uniform(0.2, 0.8, (20, 3)) if face else None,
        left_hand=rng.uniform(0.2, 0.8, (21, 3)) if left_hand else None,
        right_hand=rng.uniform(0.2, 0.8, (21, 3)) if right_hand else None,
    )


def make_sequence(
    n_frames: int,
    seed: int = 0,
    *,
    source_size: tuple[int, int] | None = None,
    sample_id: str = "sample",
) -> SkeletonSequence:
    rng = np.random.default_rng(seed)
    frames = tuple(make_frame(i, rng) for i in range(n_frames))
    return SkeletonSequence(frames=frames, source_size=source_size, sample_id=sample_id)


def write_dataset(
    root: Path,
    lengths_by_split: dict[str, list[int]],
    *,
    n_classes: int = 2,
    seed: int = 0,
    normalization: str = "passthrough",
) -> Path:
    """Write keypoint files plus a manifest; returns the manifest path.

    Sample ``<split><i>`` gets ``lengths_by_split[split][i]`` frames and
    label ``i % n_classes``.
    """
    root.mkdir(parents=True, exist_ok=True)
    items = []
    counter = 0
    for split, lengths in lengths_by_split.items():
        for i, length in enumerate(lengths):
            sid = f"{split}{i:03d}"
            path = root / f"{sid}.jsonl"
            write_keypoints(path, make_sequence(length, seed=seed + counter, sample_id=sid))
            items.append(
                {
                    "sample_id": sid,
                    "keypoints_path": path.name,
                    "label": i % n_classes,
                    "split": split,
                }
            )
            counter += 1
    manifest = {
        "topology_variant": "standard68",
        "normalization": normalization,
        "label_map": {str(c): f"gloss{c}" for c in range(n_classes)},
        "items": items,
    }
    manifest_path = root / "manifest.json"
    manifest_path.write_text(json.dumps(manifest, indent=2))
    return manifest_path


@pytest.fixture
def tiny_manifest(tmp_path) -> Path:
    """Three training samples with lengths 10, 20, 30 (H = 20)."""
    return write_dataset(tmp_path / "data", {"train": [10, 20, 30]})
