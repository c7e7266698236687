"""Scale, flip, and speed augmentations with a reproducible sampling contract.

Plan randomness comes from a generator keyed by (global seed, sample id,
epoch/copy index), so the plan for any sample is independent of worker
scheduling and identical across reruns.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, replace
from typing import TYPE_CHECKING

import numpy as np

from .encode import TssiImage, resize_rows
from .errors import FactorOutOfRange, MissingStats
from .sequence import KeypointFrame, PreprocessedSequence, ROOT_NAME
from .topology import MirrorTable

if TYPE_CHECKING:
    from .dataset import DatasetStats

SCALE_RANGE = (0.5, 1.0)
FLIP_PROBABILITY = 0.5


@dataclass(frozen=True)
class AugmentationPlan:
    """Concrete draw of the three techniques for one sample."""

    scale_factor: float | None = None
    do_flip: bool = False
    target_length: int | None = None


@dataclass(frozen=True)
class AugmentationConfig:
    enable_scale: bool = True
    enable_flip: bool = True
    enable_speed: bool = True
    seed: int = 0


def plan_rng(seed: int, sample_id: str, epoch: int) -> np.random.Generator:
    """Counter-style generator fully determined by (seed, sample id, epoch)."""
    digest = hashlib.blake2b(sample_id.encode("utf-8"), digest_size=8).digest()
    key = int.from_bytes(digest, "little")
    ss = np.random.SeedSequence(entropy=[seed & 0xFFFFFFFFFFFFFFFF, key, epoch])
    return np.random.Generator(np.random.Philox(ss))


def sample_plan(
    rng: np.random.Generator,
    config: AugmentationConfig,
    stats: "DatasetStats | None" = None,
) -> AugmentationPlan:
    """Draw one plan: scale ~ U[0.5, 1], flip ~ Bernoulli(0.5), speed target
    ~ uniform integer in [p25, p75] of the training lengths."""
    scale = None
    if config.enable_scale:
        scale = float(rng.uniform(*SCALE_RANGE))
    do_flip = bool(rng.random() < FLIP_PROBABILITY) if config.enable_flip else False
    target = None
    if config.enable_speed:
        if stats is None or stats.p25 is None or stats.p75 is None:
            raise MissingStats("speed augmentation needs the p25/p75 training-length percentiles")
        target = int(rng.integers(stats.p25, stats.p75, endpoint=True))
    return AugmentationPlan(scale_factor=scale, do_flip=do_flip, target_length=target)


def _map_frames(sequence: PreprocessedSequence, fn) -> PreprocessedSequence:
    return replace(sequence, frames=tuple(fn(f) for f in sequence.frames))


def scale_skeleton(sequence: PreprocessedSequence, factor: float) -> PreprocessedSequence:
    """Shrink every frame towards its own root (mid-shoulders) in x/y.

    Mimics smaller body sizes; z is untouched and the anchor never moves.
    """
    if not SCALE_RANGE[0] <= factor <= SCALE_RANGE[1]:
        raise FactorOutOfRange(f"scale factor {factor} outside [{SCALE_RANGE[0]}, {SCALE_RANGE[1]}]")

    def scale_frame(frame: KeypointFrame) -> KeypointFrame:
        anchor = np.asarray(frame.pose[ROOT_NAME][:2], dtype=np.float64)

        def fn(block: np.ndarray) -> np.ndarray:
            out = np.array(block, dtype=np.float64)
            # anchor + factor*(p - anchor), arranged so factor 1.0 is exact.
            out[:, :2] = anchor * (1.0 - factor) + factor * out[:, :2]
            out[:, :2] = np.clip(out[:, :2], 0.0, 1.0)
            return out

        pose = {k: fn(v.reshape(1, 3)).reshape(3) for k, v in frame.pose.items()}
        return KeypointFrame(frame.frame_index, pose, fn(frame.face), fn(frame.left_hand), fn(frame.right_hand))

    return _map_frames(sequence, scale_frame)


def _swap_side(name: str) -> str:
    if name.startswith("left_"):
        return "right_" + name[len("left_"):]
    if name.startswith("right_"):
        return "left_" + name[len("right_"):]
    return name


def flip_skeleton(
    sequence: PreprocessedSequence,
    mirror: MirrorTable,
    swap_identities: bool = True,
) -> PreprocessedSequence:
    """Mirror every frame horizontally (x -> 1 - x) and swap left/right
    joint identities through the mirror table.

    ``swap_identities=False`` mirrors coordinates only, for compatibility
    with pipelines that never relabel.
    """
    face_perm = np.asarray(mirror.face_rows, dtype=np.intp)
    hand_perm = np.asarray(mirror.hand_rows, dtype=np.intp)
    inverse_hand = np.empty_like(hand_perm)
    inverse_hand[hand_perm] = np.arange(len(hand_perm))

    def flip_frame(frame: KeypointFrame) -> KeypointFrame:
        def mirror_x(block: np.ndarray) -> np.ndarray:
            out = np.array(block, dtype=np.float64)
            out[:, 0] = 1.0 - out[:, 0]
            return out

        pose = {k: mirror_x(v.reshape(1, 3)).reshape(3) for k, v in frame.pose.items()}
        face = mirror_x(frame.face)
        left = mirror_x(frame.left_hand)
        right = mirror_x(frame.right_hand)
        if swap_identities:
            pose = {_swap_side(k): v for k, v in pose.items()}
            face = face[face_perm]
            left, right = right[hand_perm], left[inverse_hand]
        return KeypointFrame(frame.frame_index, pose, face, left, right)

    return _map_frames(sequence, flip_frame)


def speed_resample(image: TssiImage, target_length: int) -> TssiImage:
    """Stretch or squeeze the image vertically to ``target_length`` rows.

    Runs before height fitting in the training pipeline.
    """
    return resize_rows(image, target_length)
