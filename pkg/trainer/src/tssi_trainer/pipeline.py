"""Bridge to the encoder CLI: materializes tensor datasets for training."""

from __future__ import annotations

import subprocess
import sys
from pathlib import Path

from .tensors import TensorDatasetSplit, load_split, split_map_from_manifest


def encode_with_cli(
    manifest: str | Path,
    out_dir: str | Path,
    *,
    augment: tuple[str, ...] = (),
    copies: int = 0,
    seed: int = 0,
    height: int | None = None,
    workers: int = 1,
) -> Path:
    """Run the encoder CLI over a manifest; returns the output directory.

    The trainer never links against the encoder package: everything flows
    through its command line and file formats.
    """
    out_dir = Path(out_dir)
    cmd = [
        sys.executable,
        "-m",
        "tssi.cli",
        "encode",
        "--manifest",
        str(manifest),
        "--out",
        str(out_dir),
        "--seed",
        str(seed),
        "--workers",
        str(workers),
    ]
    if height is not None:
        cmd += ["--height", str(height)]
    if augment:
        cmd += ["--augment", *augment, "--copies", str(copies)]
    proc = subprocess.run(cmd, capture_output=True, text=True)
    if proc.returncode != 0:
        raise RuntimeError(
            f"encoder CLI failed with exit code {proc.returncode}:\n{proc.stderr}"
        )
    return out_dir


def load_encoded_splits(
    manifest: str | Path,
    encoded_dir: str | Path,
    *,
    include_augmented: bool = True,
    splits: tuple[str, ...] = ("train", "val", "test"),
) -> dict[str, TensorDatasetSplit]:
    """Load the tensors of an encoded directory, keyed by manifest split.

    Augmented copies only ever exist for training samples; the flag drops
    them from the training split when a run wants the plain set.
    """
    split_map = split_map_from_manifest(manifest)
    out: dict[str, TensorDatasetSplit] = {}
    for split in splits:
        if split not in set(split_map.values()):
            continue
        out[split] = load_split(
            encoded_dir,
            split_map,
            split,
            include_augmented=include_augmented and split == "train",
        )
    return out
