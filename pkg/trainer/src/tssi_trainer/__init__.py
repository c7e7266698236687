"""DenseNet-121 fine-tuning harness for TSSI-encoded datasets."""

from .ablation import (
    AblationReport,
    GridRow,
    materialized_cell_runner,
    run_configuration_grid,
    run_leave_one_out,
)
from .config import DATASET_PRESETS, TrainConfig
from .model import build_classifier, final_layer_width, parameter_count
from .pipeline import encode_with_cli, load_encoded_splits
from .schedule import lr_trace, triangular_lr
from .tensors import TensorDatasetSplit, TensorFormatError, read_tensor, split_map_from_manifest
from .train import (
    CrossValReport,
    EpochLog,
    EvalReport,
    TrainResult,
    cross_validate,
    evaluate,
    load_checkpoint,
    most_confused_pairs,
    save_checkpoint,
    stratified_folds,
    train,
)

__version__ = "0.1.0"
