"""Keypoint file parsing, dataset manifests, statistics, and batch encoding.

Keypoint files are line-delimited JSON: a header line carrying the schema
version and source frame size, then one frame object per line with the
pose / face / left_hand / right_hand blocks (``null`` marks an absent
block). The manifest is a JSON document listing samples, labels, and
splits; training-split statistics drive the target image height and the
speed-augmentation bounds.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .augment import AugmentationConfig, flip_skeleton, plan_rng, sample_plan, scale_skeleton, speed_resample
from .encode import assemble, export, fit_height
from .errors import (
    EmptySequence,
    EmptySplit,
    IoFailure,
    ParseError,
    SchemaVersionMismatch,
    TssiError,
)
from .sequence import (
    FACE_POINTS,
    HAND_POINTS,
    POSE_LANDMARKS,
    KeypointFrame,
    SkeletonSequence,
    preprocess,
)
from .topology import SkeletonGraph, build_default_graph, build_mirror_table, euler_traversal

KEYPOINTS_SCHEMA = "tssi-keypoints"
KEYPOINTS_VERSION = 1
SPLITS = ("train", "val", "test")

LABELS_FILENAME = "labels.json"
SUMMARY_FILENAME = "summary.json"


@dataclass(frozen=True)
class DatasetStats:
    """Training-split length statistics; ``height`` is the encode target H."""

    mean_length: float
    height: int
    p25: int
    p75: int
    split_counts: dict[str, int] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "mean_length": self.mean_length,
            "height": self.height,
            "p25": self.p25,
            "p75": self.p75,
            "split_counts": dict(sorted(self.split_counts.items())),
        }

    @classmethod
    def from_dict(cls, payload: dict) -> "DatasetStats":
        return cls(
            mean_length=float(payload["mean_length"]),
            height=int(payload["height"]),
            p25=int(payload["p25"]),
            p75=int(payload["p75"]),
            split_counts={k: int(v) for k, v in payload.get("split_counts", {}).items()},
        )


@dataclass(frozen=True)
class ManifestItem:
    sample_id: str
    keypoints_path: Path
    label: int
    split: str


@dataclass(frozen=True)
class DatasetManifest:
    items: tuple[ManifestItem, ...]
    label_map: dict[int, str]
    topology_variant: str = "standard68"
    normalization: str = "divide_by_frame"
    stats: DatasetStats | None = None


def load_manifest(path: str | Path) -> DatasetManifest:
    """Read and validate a manifest; keypoint paths resolve relative to it."""
    path = Path(path)
    try:
        payload = json.loads(path.read_text())
    except OSError as exc:
        raise IoFailure(f"cannot read manifest {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ParseError(f"manifest {path} is not valid JSON: {exc}") from None

    label_map = {int(k): str(v) for k, v in payload.get("label_map", {}).items()}
    items = []
    seen = set()
    base = path.parent
    for i, entry in enumerate(payload.get("items", [])):
        sid = entry.get("sample_id")
        if not sid or sid in seen:
            raise ParseError(f"item {i}: sample_id missing or duplicated ({sid!r})")
        seen.add(sid)
        split = entry.get("split")
        if split not in SPLITS:
            raise ParseError(f"item {sid!r}: split must be one of {SPLITS}, got {split!r}")
        label = entry.get("label")
        if not isinstance(label, int) or label not in label_map:
            raise ParseError(f"item {sid!r}: label {label!r} is not in the label map")
        items.append(
            ManifestItem(
                sample_id=sid,
                keypoints_path=base / entry["keypoints_path"],
                label=label,
                split=split,
            )
        )
    stats = None
    if payload.get("stats"):
        stats = DatasetStats.from_dict(payload["stats"])
    return DatasetManifest(
        items=tuple(items),
        label_map=label_map,
        topology_variant=payload.get("topology_variant", "standard68"),
        normalization=payload.get("normalization", "divide_by_frame"),
        stats=stats,
    )


def save_manifest(manifest: DatasetManifest, path: str | Path) -> None:
    base = Path(path).parent
    payload = {
        "topology_variant": manifest.topology_variant,
        "normalization": manifest.normalization,
        "label_map": {str(k): v for k, v in sorted(manifest.label_map.items())},
        "items": [
            {
                "sample_id": it.sample_id,
                "keypoints_path": _relative_to(it.keypoints_path, base),
                "label": it.label,
                "split": it.split,
            }
            for it in manifest.items
        ],
    }
    if manifest.stats is not None:
        payload["stats"] = manifest.stats.to_dict()
    try:
        Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    except OSError as exc:
        raise IoFailure(f"cannot write manifest {path}: {exc}") from exc


def _relative_to(target: Path, base: Path) -> str:
    try:
        return target.relative_to(base).as_posix()
    except ValueError:
        return str(target)


def _parse_block(value, points: int, lineno: int, name: str) -> np.ndarray | None:
    if value is None:
        return None
    if not isinstance(value, list) or len(value) != points:
        raise ParseError(f"{name} block must be null or a list of {points} points", lineno)
    arr = np.asarray(value, dtype=np.float64)
    if arr.shape != (points, 3):
        raise ParseError(f"{name} points must each hold [x, y, z]", lineno)
    return arr


def read_keypoints(path: str | Path) -> SkeletonSequence:
    """Parse one keypoint file into a :class:`SkeletonSequence`."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise IoFailure(f"cannot read keypoints {path}: {exc}") from exc

    lines = text.splitlines()
    if not lines:
        raise ParseError("keypoint file is empty", 1)
    try:
        header = json.loads(lines[0])
    except json.JSONDecodeError as exc:
        raise ParseError(f"header is not valid JSON: {exc.msg}", 1) from None
    if header.get("schema") != KEYPOINTS_SCHEMA:
        raise ParseError(f"expected schema {KEYPOINTS_SCHEMA!r}", 1)
    if header.get("version") != KEYPOINTS_VERSION:
        raise SchemaVersionMismatch(
            f"keypoints schema version {header.get('version')!r}, expected {KEYPOINTS_VERSION}"
        )
    size = header.get("source_size")
    if size == "pre-normalized":
        source_size = None
    elif isinstance(size, list) and len(size) == 2:
        source_size = (int(size[0]), int(size[1]))
    else:
        raise ParseError("source_size must be [width, height] or \"pre-normalized\"", 1)

    frames: list[KeypointFrame] = []
    last_index = -1
    for lineno, raw in enumerate(lines[1:], start=2):
        if not raw.strip():
            continue
        try:
            obj = json.loads(raw)
        except json.JSONDecodeError as exc:
            raise ParseError(f"frame is not valid JSON: {exc.msg}", lineno) from None
        if not isinstance(obj, dict) or "frame" not in obj:
            raise ParseError("frame object must carry a 'frame' index", lineno)
        idx = obj["frame"]
        if not isinstance(idx, int) or idx <= last_index:
            raise ParseError(f"frame index {idx!r} is not strictly increasing", lineno)
        last_index = idx

        pose_obj = obj.get("pose")
        pose = None
        if pose_obj is not None:
            if not isinstance(pose_obj, dict):
                raise ParseError("pose block must be null or an object", lineno)
            missing = [n for n in POSE_LANDMARKS if n not in pose_obj]
            if missing:
                raise ParseError(f"pose block is missing landmarks {missing}", lineno)
            pose = {}
            for name, coords in pose_obj.items():
                arr = np.asarray(coords, dtype=np.float64)
                if arr.shape != (3,):
                    raise ParseError(f"pose landmark {name!r} must hold [x, y, z]", lineno)
                pose[name] = arr
        frames.append(
            KeypointFrame(
                frame_index=idx,
                pose=pose,
                face=_parse_block(obj.get("face"), FACE_POINTS, lineno, "face"),
                left_hand=_parse_block(obj.get("left_hand"), HAND_POINTS, lineno, "left_hand"),
                right_hand=_parse_block(obj.get("right_hand"), HAND_POINTS, lineno, "right_hand"),
            )
        )
    return SkeletonSequence(frames=tuple(frames), source_size=source_size, sample_id=path.stem)


def write_keypoints(path: str | Path, sequence: SkeletonSequence) -> None:
    """Serialize a sequence in the keypoint file format (fixture/debug aid)."""
    header = {
        "schema": KEYPOINTS_SCHEMA,
        "version": KEYPOINTS_VERSION,
        "source_size": "pre-normalized" if sequence.source_size is None else list(sequence.source_size),
    }
    rows = [json.dumps(header)]
    for f in sequence.frames:
        obj = {
            "frame": f.frame_index,
            "pose": None if f.pose is None else {k: [float(x) for x in v] for k, v in f.pose.items()},
            "face": None if f.face is None else f.face.tolist(),
            "left_hand": None if f.left_hand is None else f.left_hand.tolist(),
            "right_hand": None if f.right_hand is None else f.right_hand.tolist(),
        }
        rows.append(json.dumps(obj))
    try:
        Path(path).write_text("\n".join(rows) + "\n")
    except OSError as exc:
        raise IoFailure(f"cannot write keypoints {path}: {exc}") from exc


def _nearest_rank(sorted_values: list[int], percentile: float) -> int:
    """Nearest-rank percentile: the ceil(p/100 * n)-th smallest value."""
    n = len(sorted_values)
    rank = max(1, math.ceil(percentile / 100.0 * n))
    return sorted_values[rank - 1]


def compute_stats(manifest: DatasetManifest, split: str = "train") -> DatasetStats:
    """Length statistics of one split, measured after frame filtering.

    Samples in which no frame survives are excluded; the mean length is
    rounded half-up to give the target height H.
    """
    chosen = [it for it in manifest.items if it.split == split]
    if not chosen:
        raise EmptySplit(f"manifest has no items in split {split!r}")
    lengths = []
    for item in chosen:
        seq = read_keypoints(item.keypoints_path)
        try:
            lengths.append(preprocess(seq, manifest.normalization).length)
        except EmptySequence:
            continue
    if not lengths:
        raise EmptySplit(f"no sample in split {split!r} has usable frames")
    mean = sum(lengths) / len(lengths)
    ordered = sorted(lengths)
    counts: dict[str, int] = {}
    for it in manifest.items:
        counts[it.split] = counts.get(it.split, 0) + 1
    return DatasetStats(
        mean_length=mean,
        height=math.floor(mean + 0.5),
        p25=_nearest_rank(ordered, 25),
        p75=_nearest_rank(ordered, 75),
        split_counts=counts,
    )


@dataclass(frozen=True)
class EncodeOptions:
    height: int | None = None
    channel_policy: str = "zero_z"
    augmentation: AugmentationConfig | None = None
    copies: int = 0
    workers: int = 1
    graph: SkeletonGraph | None = None  # overrides the manifest's variant


@dataclass(frozen=True)
class EncodeSummary:
    height: int
    encoded: tuple[str, ...]
    skipped: tuple[tuple[str, str], ...]
    stats: DatasetStats | None

    def to_dict(self) -> dict:
        return {
            "height": self.height,
            "encoded": list(self.encoded),
            "skipped": [{"sample_id": sid, "reason": why} for sid, why in self.skipped],
            "stats": None if self.stats is None else self.stats.to_dict(),
        }


def encode_dataset(
    manifest: DatasetManifest,
    out_dir: str | Path,
    options: EncodeOptions = EncodeOptions(),
) -> EncodeSummary:
    """Encode every manifest item to a raw_f32 tensor file.

    Training samples additionally get ``copies`` augmented variants when an
    augmentation config is supplied. Per-sample failures are recorded in
    the summary without aborting the batch; outputs are byte-identical
    across reruns and worker counts for a fixed seed.
    """
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise IoFailure(f"cannot create output directory {out}: {exc}") from exc

    graph = options.graph or build_default_graph(manifest.topology_variant)
    order = euler_traversal(graph)
    mirror = build_mirror_table(graph)

    augmenting = options.augmentation is not None and options.copies > 0
    need_speed_stats = augmenting and options.augmentation.enable_speed
    stats = manifest.stats
    if stats is None and (options.height is None or need_speed_stats):
        stats = compute_stats(manifest)
    height = options.height if options.height is not None else stats.height

    def encode_item(item: ManifestItem) -> tuple[str, list[str], str | None]:
        written: list[str] = []
        try:
            seq = read_keypoints(item.keypoints_path)
            pre = preprocess(seq, manifest.normalization)
            image = fit_height(assemble(pre, order, options.channel_policy), height)
            name = f"{item.sample_id}.tssi"
            export(image, "raw_f32", out / name)
            written.append(name)
            if augmenting and item.split == "train":
                cfg = options.augmentation
                for copy in range(1, options.copies + 1):
                    rng = plan_rng(cfg.seed, item.sample_id, copy)
                    plan = sample_plan(rng, cfg, stats)
                    variant = pre
                    if plan.scale_factor is not None:
                        variant = scale_skeleton(variant, plan.scale_factor)
                    if plan.do_flip:
                        variant = flip_skeleton(variant, mirror)
                    aug = assemble(variant, order, options.channel_policy)
                    if plan.target_length is not None:
                        aug = speed_resample(aug, plan.target_length)
                    aug = fit_height(aug, height)
                    aug_name = f"{item.sample_id}_aug{copy}.tssi"
                    export(aug, "raw_f32", out / aug_name)
                    written.append(aug_name)
            return item.sample_id, written, None
        except TssiError as exc:
            for name in written:  # drop partial output so reruns stay identical
                (out / name).unlink(missing_ok=True)
            return item.sample_id, [], f"{type(exc).__name__}: {exc}"

    if options.workers > 1:
        with ThreadPoolExecutor(max_workers=options.workers) as pool:
            results = list(pool.map(encode_item, manifest.items))
    else:
        results = [encode_item(item) for item in manifest.items]

    results.sort(key=lambda r: r[0])
    by_sample = {it.sample_id: it for it in manifest.items}
    encoded: list[str] = []
    skipped: list[tuple[str, str]] = []
    labels: dict[str, int] = {}
    for sample_id, files, error in results:
        if error is not None:
            skipped.append((sample_id, error))
            continue
        encoded.extend(files)
        for name in files:
            labels[name] = by_sample[sample_id].label

    summary = EncodeSummary(
        height=height,
        encoded=tuple(encoded),
        skipped=tuple(skipped),
        stats=stats,
    )
    try:
        (out / LABELS_FILENAME).write_text(json.dumps(labels, indent=2, sort_keys=True) + "\n")
        (out / SUMMARY_FILENAME).write_text(
            json.dumps(summary.to_dict(), indent=2, sort_keys=True) + "\n"
        )
    except OSError as exc:
        raise IoFailure(f"cannot write index files under {out}: {exc}") from exc
    return summary
