"""Command line for training and evaluating on encoded TSSI datasets."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .ablation import AblationReport, materialized_cell_runner, run_configuration_grid, run_leave_one_out
from .config import DATASET_PRESETS, TrainConfig
from .pipeline import load_encoded_splits
from .train import cross_validate, evaluate, load_checkpoint, save_checkpoint, train


def _config_from_args(args) -> TrainConfig:
    base = DATASET_PRESETS[args.preset] if args.preset else TrainConfig(num_classes=args.num_classes)
    overrides = {}
    for name in ("num_classes", "batch_size", "epochs", "dropout", "seed"):
        value = getattr(args, name, None)
        if value is not None:
            overrides[name] = value
    if args.lr_range is not None:
        overrides["lr_min"], overrides["lr_max"] = args.lr_range
    if args.no_pretrained:
        overrides["pretrained"] = False
    if args.plain_training_set:
        overrides["augmented_copies"] = False
    return base.with_overrides(**overrides)


def _add_config_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--preset", choices=sorted(DATASET_PRESETS), help="dataset hyperparameter preset")
    p.add_argument("--num-classes", type=int, dest="num_classes")
    p.add_argument("--batch-size", type=int, dest="batch_size")
    p.add_argument("--epochs", type=int)
    p.add_argument("--dropout", type=float)
    p.add_argument("--lr-range", type=float, nargs=2, metavar=("MIN", "MAX"), dest="lr_range")
    p.add_argument("--no-pretrained", action="store_true")
    p.add_argument("--plain-training-set", action="store_true",
                   help="ignore augmented copies in the encoded directory")
    p.add_argument("--seed", type=int)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tssi-train")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="fit a classifier on an encoded dataset")
    p.add_argument("--manifest", type=Path, required=True)
    p.add_argument("--encoded", type=Path, required=True)
    p.add_argument("--checkpoint", type=Path, required=True)
    _add_config_flags(p)

    p = sub.add_parser("evaluate", help="score a checkpoint on the test split")
    p.add_argument("--manifest", type=Path, required=True)
    p.add_argument("--encoded", type=Path, required=True)
    p.add_argument("--checkpoint", type=Path, required=True)
    p.add_argument("--split", default="test")

    p = sub.add_parser("cross-validate", help="stratified k-fold over the training split")
    p.add_argument("--manifest", type=Path, required=True)
    p.add_argument("--encoded", type=Path, required=True)
    p.add_argument("--folds", type=int, default=5)
    _add_config_flags(p)

    p = sub.add_parser("ablate", help="pretraining/augmentation grid and leave-one-out row")
    p.add_argument("--manifest", type=Path, required=True)
    p.add_argument("--work-dir", type=Path, required=True)
    p.add_argument("--copies", type=int, default=2)
    p.add_argument("--height", type=int)
    p.add_argument("--skip-grid", action="store_true")
    p.add_argument("--skip-leave-one-out", action="store_true")
    _add_config_flags(p)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    if args.command == "train":
        config = _config_from_args(args)
        splits = load_encoded_splits(args.manifest, args.encoded,
                                     include_augmented=config.augmented_copies)
        result = train(config, splits["train"], splits.get("val"))
        save_checkpoint(result, config, args.checkpoint)
        print(json.dumps({
            "epochs": [vars(e) for e in result.log],
            "best_train_accuracy": result.best_train_accuracy,
            "checkpoint": str(args.checkpoint),
        }, indent=2))
        return 0

    if args.command == "evaluate":
        model, _ = load_checkpoint(args.checkpoint)
        splits = load_encoded_splits(args.manifest, args.encoded, include_augmented=False,
                                     splits=(args.split,))
        from .model import final_layer_width

        report = evaluate(model, splits[args.split], final_layer_width(model))
        print(json.dumps({
            "top1_accuracy": report.top1_accuracy,
            "confusion_matrix": report.confusion_matrix.tolist(),
        }, indent=2))
        return 0

    if args.command == "cross-validate":
        config = _config_from_args(args)
        splits = load_encoded_splits(args.manifest, args.encoded,
                                     include_augmented=config.augmented_copies)
        report = cross_validate(config, splits["train"], k=args.folds)
        print(json.dumps({
            "folds": [r.top1_accuracy for r in report.fold_reports],
            "mean_accuracy": report.mean_accuracy,
            "std_accuracy": report.std_accuracy,
        }, indent=2))
        return 0

    config = _config_from_args(args)
    runner = materialized_cell_runner(
        args.manifest, args.work_dir, config, copies=args.copies, height=args.height
    )
    grid = () if args.skip_grid else run_configuration_grid(runner)
    loo = None if args.skip_leave_one_out else run_leave_one_out(runner, pretraining=config.pretrained)
    print(json.dumps(AblationReport(grid=grid, leave_one_out=loo).to_dict(), indent=2))
    return 0


if __name__ == "__main__":
    sys.exit(main())
