from __future__ import annotations

import pytest

from tssi_trainer import DATASET_PRESETS, lr_trace, triangular_lr


def test_trace_attains_extremes_exactly():
    trace = lr_trace(24, 0.01, 0.1)
    assert trace[0] == 0.01
    assert min(trace) == 0.01
    assert max(trace) == 0.1
    assert trace[-1] == 0.01


def test_trace_is_piecewise_linear():
    trace = lr_trace(25, 0.0, 1.0)
    peak = trace.index(1.0)
    ups = [trace[i + 1] - trace[i] for i in range(peak)]
    downs = [trace[i + 1] - trace[i] for i in range(peak, len(trace) - 1)]
    assert all(abs(d - ups[0]) < 1e-12 for d in ups)
    assert all(abs(d - downs[0]) < 1e-12 for d in downs)
    assert ups[0] > 0 > downs[0]


def test_trace_per_preset_extremes():
    for name, preset in DATASET_PRESETS.items():
        trace = lr_trace(preset.epochs, preset.lr_min, preset.lr_max)
        assert min(trace) == preset.lr_min, name
        assert max(trace) == preset.lr_max, name


def test_multi_cycle_repeats_triangle():
    trace = lr_trace(20, 0.1, 0.2, cycles=2)
    assert trace[:10] == trace[10:]
    assert trace.count(0.2) == 2


def test_two_epoch_cycle_hits_both_extremes():
    assert lr_trace(2, 0.5, 1.0) == [0.5, 1.0]


def test_rejects_bad_arguments():
    with pytest.raises(ValueError):
        triangular_lr(0, 10, 0.2, 0.1)
    with pytest.raises(ValueError):
        triangular_lr(10, 10, 0.1, 0.2)
    with pytest.raises(ValueError):
        triangular_lr(0, 10, 0.1, 0.2, cycles=11)
