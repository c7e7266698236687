"""Triangular cyclical learning-rate schedule.

One full triangle spans the whole run by default: the rate starts at
``lr_min``, rises linearly to exactly ``lr_max`` at the cycle peak, and
falls back to exactly ``lr_min`` by the cycle's last epoch. ``cycles``
repeats the triangle within the run.
"""

from __future__ import annotations


def triangular_lr(
    epoch: int, total_epochs: int, lr_min: float, lr_max: float, cycles: int = 1
) -> float:
    """Learning rate for ``epoch`` in [0, total_epochs)."""
    if total_epochs < 1:
        raise ValueError("total_epochs must be >= 1")
    if not 1 <= cycles <= total_epochs:
        raise ValueError("cycles must be in [1, total_epochs]")
    if lr_min >= lr_max:
        raise ValueError(f"need lr_min < lr_max, got {lr_min} >= {lr_max}")
    if not 0 <= epoch < total_epochs:
        raise ValueError(f"epoch {epoch} outside [0, {total_epochs})")

    cycle_len = total_epochs // cycles
    if cycle_len == 1:
        return lr_max  # a one-epoch cycle can only visit the peak
    if epoch >= cycle_len * cycles:
        return lr_min  # leftover epochs after the last full cycle rest at the floor
    position = epoch % cycle_len
    peak = max(1, (cycle_len - 1) // 2)
    if position <= peak:
        frac = position / peak
    else:
        frac = (cycle_len - 1 - position) / (cycle_len - 1 - peak)
    if frac == 0.0:
        return lr_min
    if frac == 1.0:
        return lr_max
    return lr_min + (lr_max - lr_min) * frac


def lr_trace(total_epochs: int, lr_min: float, lr_max: float, cycles: int = 1) -> list[float]:
    """The full per-epoch schedule; attains lr_min and lr_max exactly."""
    return [triangular_lr(e, total_epochs, lr_min, lr_max, cycles) for e in range(total_epochs)]
