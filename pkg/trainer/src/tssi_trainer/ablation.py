"""Ablation runners: the pretraining x augmentation grid and the
leave-one-technique-out row.

Both runners delegate each cell to a ``run_cell`` callable so that the
reporting structure can be exercised independently of the (expensive)
training it normally wraps.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Protocol

from .config import TrainConfig
from .pipeline import encode_with_cli, load_encoded_splits
from .train import cross_validate, evaluate, train

ALL_TECHNIQUES = ("scale", "flip", "speed")

GRID_CELLS = (
    ("A", False, False),
    ("B", False, True),
    ("C", True, False),
    ("D", True, True),
)


@dataclass(frozen=True)
class GridRow:
    model: str
    pretraining: bool
    augmentation: bool
    accuracy: float


@dataclass(frozen=True)
class AblationReport:
    grid: tuple[GridRow, ...] = ()
    leave_one_out: dict[str, float] | None = None

    def to_dict(self) -> dict:
        out: dict = {}
        if self.grid:
            out["grid"] = [vars(row) for row in self.grid]
        if self.leave_one_out is not None:
            out["leave_one_out"] = dict(self.leave_one_out)
        return out


class CellRunner(Protocol):
    def __call__(self, *, pretraining: bool, techniques: tuple[str, ...]) -> float: ...


def run_configuration_grid(run_cell: CellRunner) -> tuple[GridRow, ...]:
    """Accuracy for each of the four pretraining x augmentation cells."""
    rows = []
    for name, pretraining, augmented in GRID_CELLS:
        accuracy = run_cell(
            pretraining=pretraining,
            techniques=ALL_TECHNIQUES if augmented else (),
        )
        rows.append(GridRow(model=name, pretraining=pretraining, augmentation=augmented, accuracy=accuracy))
    return tuple(rows)


def run_leave_one_out(run_cell: CellRunner, pretraining: bool = True) -> dict[str, float]:
    """Accuracy with all techniques, then with each one removed in turn.

    Keys: ``none`` (nothing removed) plus one per removed technique.
    """
    out = {"none": run_cell(pretraining=pretraining, techniques=ALL_TECHNIQUES)}
    for removed in ALL_TECHNIQUES:
        kept = tuple(t for t in ALL_TECHNIQUES if t != removed)
        out[removed] = run_cell(pretraining=pretraining, techniques=kept)
    return out


def materialized_cell_runner(
    manifest: str | Path,
    work_dir: str | Path,
    config: TrainConfig,
    *,
    copies: int = 2,
    height: int | None = None,
    use_cross_validation: bool = False,
    k: int = 5,
) -> CellRunner:
    """Build the production cell runner: encode (via the encoder CLI),
    train, and score one configuration per call.

    Encoded variants are cached per technique set under ``work_dir`` so
    the grid and the leave-one-out row can share them.
    """
    work_dir = Path(work_dir)

    def run_cell(*, pretraining: bool, techniques: tuple[str, ...]) -> float:
        tag = "plain" if not techniques else "aug-" + "-".join(sorted(techniques))
        encoded = work_dir / tag
        if not encoded.exists():
            encode_with_cli(
                manifest,
                encoded,
                augment=tuple(sorted(techniques)),
                copies=copies if techniques else 0,
                seed=config.seed,
                height=height,
            )
        splits = load_encoded_splits(manifest, encoded)
        cell_config = config.with_overrides(pretrained=pretraining)
        if use_cross_validation:
            return cross_validate(cell_config, splits["train"], k=k).mean_accuracy
        result = train(cell_config, splits["train"], splits.get("val"))
        holdout = splits.get("test") or splits.get("val") or splits["train"]
        return evaluate(result.model, holdout, config.num_classes).top1_accuracy

    return run_cell
