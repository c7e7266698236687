"""Raw keypoint sequences and the preprocessing pipeline.

A frame holds up to four landmark blocks (pose, face, left hand, right
hand); a block is either wholly present or wholly absent, matching how
holistic pose estimators fail. Preprocessing filters frames without a
pose, normalizes coordinates to [0, 1], and imputes absent hands/face
from the wrist/nose landmarks.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import EmptySequence, MissingPoseBlock, NonPositiveFrameSize

POSE_LANDMARKS = (
    "nose",
    "left_shoulder",
    "right_shoulder",
    "left_elbow",
    "right_elbow",
    "left_wrist",
    "right_wrist",
)
ROOT_NAME = "mid_shoulders"
FACE_POINTS = 20
HAND_POINTS = 21

NORMALIZATION_MODES = ("divide_by_frame", "passthrough")

# Normalized coordinates within this band are treated as estimator noise
# and clamped; anything beyond it marks the whole frame as unusable.
_OVERSHOOT_BAND = 0.05


@dataclass(frozen=True)
class KeypointFrame:
    """Landmarks of one video frame, in source units until normalized.

    Blocks are float64 arrays; precision drops to float32 only at image
    serialization time.
    """

    frame_index: int
    pose: dict[str, np.ndarray] | None = None
    face: np.ndarray | None = None        # (20, 3)
    left_hand: np.ndarray | None = None   # (21, 3)
    right_hand: np.ndarray | None = None  # (21, 3)

    def block(self, part: str) -> np.ndarray | None:
        return {"face": self.face, "left_hand": self.left_hand, "right_hand": self.right_hand}[part]


@dataclass(frozen=True)
class SkeletonSequence:
    """Ordered frames of one sample; ``source_size`` is None when the data
    arrives pre-normalized."""

    frames: tuple[KeypointFrame, ...]
    source_size: tuple[int, int] | None = None
    sample_id: str = ""
    label: int | None = None

    def __post_init__(self):
        indices = [f.frame_index for f in self.frames]
        if any(b <= a for a, b in zip(indices, indices[1:])):
            raise ValueError("frame_index must be strictly increasing")


@dataclass(frozen=True)
class PreprocessedSequence:
    """Complete, normalized frames: every block present, x/y in [0, 1],
    and the synthetic root stored under ``pose['mid_shoulders']``."""

    frames: tuple[KeypointFrame, ...]
    sample_id: str = ""
    label: int | None = None

    @property
    def length(self) -> int:
        return len(self.frames)


def _map_blocks(frame: KeypointFrame, fn) -> KeypointFrame:
    """Apply ``fn`` to every present (n, 3) block, pose entries included."""
    pose = None
    if frame.pose is not None:
        pose = {k: fn(v.reshape(1, 3)).reshape(3) for k, v in frame.pose.items()}
    out = {}
    for part in ("face", "left_hand", "right_hand"):
        blk = frame.block(part)
        out[part] = None if blk is None else fn(blk)
    return KeypointFrame(frame.frame_index, pose, out["face"], out["left_hand"], out["right_hand"])


def normalize_frame(
    frame: KeypointFrame,
    source_size: tuple[int, int] | None,
    mode: str = "divide_by_frame",
) -> KeypointFrame:
    """Scale x by 1/width and y by 1/height; z is never touched.

    ``passthrough`` returns the frame unchanged, for datasets whose
    coordinates are already normalized at the source.
    """
    if mode == "passthrough":
        return frame
    if mode != "divide_by_frame":
        raise ValueError(f"unknown normalization mode {mode!r}")
    if source_size is None:
        raise NonPositiveFrameSize("divide_by_frame requires a source frame size")
    width, height = source_size
    if width <= 0 or height <= 0:
        raise NonPositiveFrameSize(f"frame size must be positive, got {source_size}")
    divisor = np.array([width, height, 1.0], dtype=np.float64)

    def fn(block: np.ndarray) -> np.ndarray:
        return np.asarray(block, dtype=np.float64) / divisor

    return _map_blocks(frame, fn)


def impute_frame(frame: KeypointFrame) -> KeypointFrame:
    """Fill absent blocks from pose proxies and compute the synthetic root.

    An absent hand takes the same-side pose wrist; an absent face takes
    the pose nose; the root is the midpoint of the two shoulders.
    Idempotent: complete frames pass through with blocks unchanged.
    """
    if frame.pose is None:
        raise MissingPoseBlock(f"frame {frame.frame_index} has no pose block")
    pose = dict(frame.pose)
    root = (np.asarray(pose["left_shoulder"], dtype=np.float64) + pose["right_shoulder"]) / 2.0
    pose[ROOT_NAME] = root

    face = frame.face
    if face is None:
        face = np.tile(np.asarray(pose["nose"], dtype=np.float64), (FACE_POINTS, 1))
    left = frame.left_hand
    if left is None:
        left = np.tile(np.asarray(pose["left_wrist"], dtype=np.float64), (HAND_POINTS, 1))
    right = frame.right_hand
    if right is None:
        right = np.tile(np.asarray(pose["right_wrist"], dtype=np.float64), (HAND_POINTS, 1))
    return KeypointFrame(frame.frame_index, pose, face, left, right)


def filter_frames(sequence: SkeletonSequence) -> SkeletonSequence:
    """Drop exactly the frames whose pose block is absent."""
    kept = tuple(f for f in sequence.frames if f.pose is not None)
    if not kept:
        raise EmptySequence(f"sample {sequence.sample_id!r}: no frame has a pose estimate")
    return replace(sequence, frames=kept)


def _in_band(frame: KeypointFrame) -> bool:
    lo, hi = -_OVERSHOOT_BAND, 1.0 + _OVERSHOOT_BAND
    for blk in _iter_blocks(frame):
        xy = blk[:, :2]
        if xy.min() < lo or xy.max() > hi:
            return False
    return True


def _iter_blocks(frame: KeypointFrame):
    if frame.pose is not None:
        for v in frame.pose.values():
            yield v.reshape(1, 3)
    for part in ("face", "left_hand", "right_hand"):
        blk = frame.block(part)
        if blk is not None:
            yield blk


def _clamp_xy(frame: KeypointFrame) -> KeypointFrame:
    def fn(block: np.ndarray) -> np.ndarray:
        out = np.array(block, dtype=np.float64)
        out[:, :2] = np.clip(out[:, :2], 0.0, 1.0)
        return out

    return _map_blocks(frame, fn)


def preprocess(sequence: SkeletonSequence, mode: str = "divide_by_frame") -> PreprocessedSequence:
    """Filter, normalize, and impute a raw sequence.

    Frames whose normalized x/y land outside [-0.05, 1.05] count as
    pose-absent and are dropped with the rest; survivors are clamped into
    [0, 1] and imputed to completeness.
    """
    filtered = filter_frames(sequence)
    kept: list[KeypointFrame] = []
    for frame in filtered.frames:
        norm = normalize_frame(frame, sequence.source_size, mode)
        if _in_band(norm):
            kept.append(_clamp_xy(norm))
    if not kept:
        raise EmptySequence(
            f"sample {sequence.sample_id!r}: every pose-bearing frame is out of range"
        )
    complete = tuple(impute_frame(f) for f in kept)
    return PreprocessedSequence(frames=complete, sample_id=sequence.sample_id, label=sequence.label)
