"""Training loop, evaluation, and stratified cross-validation."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import torch
from torch import nn

from .config import TrainConfig
from .model import build_classifier, predict_logits
from .schedule import triangular_lr
from .tensors import TensorDatasetSplit


@dataclass(frozen=True)
class EpochLog:
    epoch: int
    lr: float
    train_loss: float
    train_accuracy: float
    val_accuracy: float | None = None


@dataclass
class TrainResult:
    model: nn.Module
    log: list[EpochLog]

    @property
    def best_train_accuracy(self) -> float:
        return max(entry.train_accuracy for entry in self.log)


@dataclass(frozen=True)
class EvalReport:
    top1_accuracy: float
    confusion_matrix: np.ndarray  # rows: true class, columns: predicted

    def __post_init__(self):
        cm = self.confusion_matrix
        total = cm.sum()
        if total and abs(cm.trace() / total - self.top1_accuracy) > 1e-12:
            raise ValueError("confusion matrix trace disagrees with the reported accuracy")


@dataclass(frozen=True)
class CrossValReport:
    fold_reports: tuple[EvalReport, ...]
    fold_assignments: tuple[tuple[int, ...], ...]
    mean_accuracy: float
    std_accuracy: float


def _check_inputs(config: TrainConfig, split: TensorDatasetSplit, name: str) -> None:
    if split.images.ndim != 4 or split.images.shape[1] != 3:
        raise ValueError(f"{name} images must be (N, 3, H, W), got {tuple(split.images.shape)}")
    if int(split.labels.max()) >= config.num_classes or int(split.labels.min()) < 0:
        raise ValueError(f"{name} labels must lie in [0, {config.num_classes})")


def train(
    config: TrainConfig,
    train_split: TensorDatasetSplit,
    val_split: TensorDatasetSplit | None = None,
    model: nn.Module | None = None,
) -> TrainResult:
    """Fit a classifier with SGD (Nesterov momentum) under a triangular
    cyclical learning rate, logging rate, loss, and accuracy per epoch."""
    _check_inputs(config, train_split, "train")
    if val_split is not None:
        _check_inputs(config, val_split, "val")
        if val_split.images.shape[1:] != train_split.images.shape[1:]:
            raise ValueError("train and val tensors disagree on shape")

    torch.manual_seed(config.seed)
    if model is None:
        model = build_classifier(config.num_classes, config.dropout, config.pretrained)
    optimizer = torch.optim.SGD(
        model.parameters(),
        lr=config.lr_min,
        momentum=config.momentum,
        nesterov=config.nesterov,
        weight_decay=config.weight_decay,
    )
    loss_fn = nn.CrossEntropyLoss()
    generator = torch.Generator().manual_seed(config.seed)
    n = len(train_split)

    log: list[EpochLog] = []
    for epoch in range(config.epochs):
        lr = triangular_lr(epoch, config.epochs, config.lr_min, config.lr_max, config.lr_cycles)
        for group in optimizer.param_groups:
            group["lr"] = lr

        model.train()
        order = torch.randperm(n, generator=generator)
        total_loss = 0.0
        correct = 0
        for start in range(0, n, config.batch_size):
            idx = order[start : start + config.batch_size]
            images = train_split.images[idx]
            labels = train_split.labels[idx]
            optimizer.zero_grad()
            logits = model(images)
            loss = loss_fn(logits, labels)
            loss.backward()
            optimizer.step()
            total_loss += float(loss.detach()) * len(idx)
            correct += int((logits.argmax(dim=1) == labels).sum())

        val_accuracy = None
        if val_split is not None:
            val_accuracy = evaluate(model, val_split, config.num_classes).top1_accuracy
        log.append(
            EpochLog(
                epoch=epoch,
                lr=lr,
                train_loss=total_loss / n,
                train_accuracy=correct / n,
                val_accuracy=val_accuracy,
            )
        )
    return TrainResult(model=model, log=log)


def evaluate(model: nn.Module, split: TensorDatasetSplit, num_classes: int) -> EvalReport:
    """Top-1 accuracy plus the full confusion matrix of one split."""
    logits = predict_logits(model, split.images)
    predictions = logits.argmax(dim=1).numpy()
    truth = split.labels.numpy()
    cm = np.zeros((num_classes, num_classes), dtype=np.int64)
    for t, p in zip(truth, predictions):
        cm[t, p] += 1
    return EvalReport(top1_accuracy=float(cm.trace() / cm.sum()), confusion_matrix=cm)


def most_confused_pairs(report: EvalReport, top: int = 3) -> list[tuple[int, int, int]]:
    """(true class, predicted class, count) of the worst off-diagonal cells."""
    cm = report.confusion_matrix.copy()
    np.fill_diagonal(cm, 0)
    flat = [(int(cm[i, j]), i, j) for i in range(cm.shape[0]) for j in range(cm.shape[1]) if cm[i, j]]
    flat.sort(key=lambda item: (-item[0], item[1], item[2]))
    return [(i, j, count) for count, i, j in flat[:top]]


def stratified_folds(labels: np.ndarray | list[int], k: int, seed: int = 0) -> list[np.ndarray]:
    """Deal each class's shuffled samples round-robin into ``k`` folds.

    Keeps per-class proportions within one sample of each other; raises
    when any class has fewer than ``k`` samples.
    """
    labels = np.asarray(labels)
    rng = np.random.default_rng(seed)
    folds: list[list[int]] = [[] for _ in range(k)]
    offset = 0
    for cls in np.unique(labels):
        idx = np.flatnonzero(labels == cls)
        if len(idx) < k:
            raise ValueError(f"class {int(cls)} has {len(idx)} samples, fewer than k={k}")
        rng.shuffle(idx)
        for j, sample in enumerate(idx):
            folds[(j + offset) % k].append(int(sample))
        offset += len(idx) % k  # rotate so remainders spread across folds
    return [np.array(sorted(fold)) for fold in folds]


def cross_validate(config: TrainConfig, pool: TensorDatasetSplit, k: int = 5) -> CrossValReport:
    """Stratified k-fold cross-validation over a training pool."""
    _check_inputs(config, pool, "pool")
    folds = stratified_folds(pool.labels.numpy(), k, seed=config.seed)
    reports: list[EvalReport] = []
    for held_out in folds:
        mask = np.ones(len(pool), dtype=bool)
        mask[held_out] = False
        train_idx = np.flatnonzero(mask)
        train_part = TensorDatasetSplit(
            images=pool.images[train_idx],
            labels=pool.labels[train_idx],
            files=[pool.files[i] for i in train_idx],
        )
        val_part = TensorDatasetSplit(
            images=pool.images[held_out],
            labels=pool.labels[held_out],
            files=[pool.files[i] for i in held_out],
        )
        result = train(config, train_part)
        reports.append(evaluate(result.model, val_part, config.num_classes))
    accuracies = np.array([r.top1_accuracy for r in reports])
    return CrossValReport(
        fold_reports=tuple(reports),
        fold_assignments=tuple(tuple(f.tolist()) for f in folds),
        mean_accuracy=float(accuracies.mean()),
        std_accuracy=float(accuracies.std()),
    )


def save_checkpoint(result: TrainResult, config: TrainConfig, path: str | Path) -> None:
    torch.save(
        {
            "state_dict": result.model.state_dict(),
            "num_classes": config.num_classes,
            "dropout": config.dropout,
            "log": [vars(entry) for entry in result.log],
        },
        path,
    )


def load_checkpoint(path: str | Path) -> tuple[nn.Module, list[EpochLog]]:
    payload = torch.load(path, map_location="cpu", weights_only=False)
    model = build_classifier(payload["num_classes"], payload["dropout"], pretrained=False)
    model.load_state_dict(payload["state_dict"])
    log = [EpochLog(**entry) for entry in payload["log"]]
    return model, log
