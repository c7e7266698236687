from __future__ import annotations

import json

import pytest

import tssi_trainer as tt
from tssi_trainer.ablation import materialized_cell_runner
from tssi_trainer.cli import main


def test_load_encoded_splits_respects_split_map(synthetic_dataset):
    manifest, encoded = synthetic_dataset
    splits = tt.load_encoded_splits(manifest, encoded)
    assert set(splits) == {"train"}
    assert len(splits["train"]) == 160


def test_materialized_cell_runner_trains_one_cell(tmp_path, synthetic_dataset):
    manifest, _ = synthetic_dataset
    config = tt.TrainConfig(
        num_classes=4, batch_size=32, epochs=1, lr_min=0.001, lr_max=0.005,
        pretrained=False, seed=5,
    )
    runner = materialized_cell_runner(manifest, tmp_path / "cells", config, copies=1, height=40)
    accuracy = runner(pretraining=False, techniques=("scale",))
    assert 0.0 <= accuracy <= 1.0
    encoded = tmp_path / "cells" / "aug-scale"
    assert (encoded / "labels.json").exists()
    labels = json.loads((encoded / "labels.json").read_text())
    assert any(name.endswith("_aug1.tssi") for name in labels)


def test_cli_train_then_evaluate(tmp_path, synthetic_dataset, capsys):
    manifest, encoded = synthetic_dataset
    ckpt = tmp_path / "model.pt"
    code = main([
        "train", "--manifest", str(manifest), "--encoded", str(encoded),
        "--checkpoint", str(ckpt), "--num-classes", "4", "--batch-size", "32",
        "--epochs", "1", "--lr-range", "0.001", "0.005", "--no-pretrained", "--seed", "3",
    ])
    assert code == 0
    payload = json.loads(capsys.readouterr().out)
    assert len(payload["epochs"]) == 1
    assert ckpt.exists()

    code = main([
        "evaluate", "--manifest", str(manifest), "--encoded", str(encoded),
        "--checkpoint", str(ckpt), "--split", "train",
    ])
    assert code == 0
    report = json.loads(capsys.readouterr().out)
    assert 0.0 <= report["top1_accuracy"] <= 1.0
    cm = report["confusion_matrix"]
    assert len(cm) == 4 and len(cm[0]) == 4
    assert sum(sum(row) for row in cm) == 160
