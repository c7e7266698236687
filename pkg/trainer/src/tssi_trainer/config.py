"""Training configuration and the per-dataset hyperparameter presets."""

from __future__ import annotations

from dataclasses import dataclass, replace


@dataclass(frozen=True)
class TrainConfig:
    num_classes: int
    batch_size: int = 64
    weight_decay: float = 1e-5
    dropout: float = 0.3
    lr_min: float = 0.001
    lr_max: float = 0.0065
    epochs: int = 100
    momentum: float = 0.98
    nesterov: bool = True
    pretrained: bool = True
    lr_cycles: int = 1
    augmented_copies: bool = True  # include *_aug files from the encoded set
    seed: int = 0

    def __post_init__(self):
        if self.lr_min >= self.lr_max:
            raise ValueError(f"need lr_min < lr_max, got {self.lr_min} >= {self.lr_max}")
        if not 0.0 <= self.dropout < 1.0:
            raise ValueError(f"dropout must be in [0, 1), got {self.dropout}")

    def with_overrides(self, **kwargs) -> "TrainConfig":
        return replace(self, **kwargs)


# Tuned per dataset: batch size, weight decay, dropout, LR range, epoch
# budget, and whether ImageNet initialization is used.
DATASET_PRESETS: dict[str, TrainConfig] = {
    "wlasl100": TrainConfig(
        num_classes=100,
        batch_size=64,
        weight_decay=1e-5,
        dropout=0.3,
        lr_min=0.001,
        lr_max=0.0065,
        epochs=100,
        pretrained=True,
    ),
    "autsl": TrainConfig(
        num_classes=226,
        batch_size=64,
        weight_decay=1e-5,
        dropout=0.5,
        lr_min=0.01,
        lr_max=0.5,
        epochs=24,
        pretrained=False,
    ),
    "lsm": TrainConfig(
        num_classes=30,
        batch_size=64,
        weight_decay=1e-5,
        dropout=0.3,
        lr_min=0.01,
        lr_max=0.1,
        epochs=24,
        pretrained=False,
    ),
}
