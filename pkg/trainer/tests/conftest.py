from __future__ import annotations

from pathlib import Path

import pytest

from synthmotion import write_synthetic_dataset

import tssi_trainer as tt


@pytest.fixture(scope="session")
def synthetic_dataset(tmp_path_factory) -> tuple[Path, Path]:
    """(manifest path, encoded dir) for the 4-class synthetic motion set,
    generated once and encoded through the encoder CLI."""
    root = tmp_path_factory.mktemp("synthetic")
    manifest = write_synthetic_dataset(root / "data", per_class=40, seed=1)
    encoded = tt.encode_with_cli(manifest, root / "encoded", seed=3)
    return manifest, encoded
