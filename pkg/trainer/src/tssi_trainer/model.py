"""DenseNet-121 classifier head for TSSI images."""

from __future__ import annotations

import torch
from torch import nn
from torchvision.models import densenet121
from torchvision.models.densenet import DenseNet121_Weights

# Five spatial halvings (stem conv, stem pool, three transitions) before
# global pooling: inputs need at least 32 rows.
MIN_INPUT_ROWS = 32


def build_classifier(num_classes: int, dropout: float = 0.3, pretrained: bool = False) -> nn.Module:
    """DenseNet-121 backbone with dropout before a fresh final layer.

    ``pretrained`` initializes the backbone from ImageNet weights (the
    classifier head is always newly initialized). Accepts (B, 3, H, W)
    input with arbitrary H, W >= 32; the rectangular TSSI layout needs no
    square resizing because of the global pooling stage.
    """
    if num_classes < 2:
        raise ValueError(f"num_classes must be >= 2, got {num_classes}")
    if not 0.0 <= dropout < 1.0:
        raise ValueError(f"dropout must be in [0, 1), got {dropout}")
    weights = DenseNet121_Weights.IMAGENET1K_V1 if pretrained else None
    try:
        model = densenet121(weights=weights)
    except Exception as exc:  # weight download needs network access
        if pretrained:
            raise RuntimeError(
                "could not load ImageNet weights (offline?); build with pretrained=False"
            ) from exc
        raise
    in_features = model.classifier.in_features
    model.classifier = nn.Sequential(
        nn.Dropout(p=dropout),
        nn.Linear(in_features, num_classes),
    )
    return model


def parameter_count(model: nn.Module) -> int:
    return sum(p.numel() for p in model.parameters())


def final_layer_width(model: nn.Module) -> int:
    head = model.classifier
    if isinstance(head, nn.Sequential):
        head = head[-1]
    return head.out_features


@torch.no_grad()
def predict_logits(model: nn.Module, images: torch.Tensor, batch_size: int = 64) -> torch.Tensor:
    model.eval()
    outputs = [model(images[i : i + batch_size]) for i in range(0, images.shape[0], batch_size)]
    return torch.cat(outputs, dim=0)
