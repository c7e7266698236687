"""Tree Structure Skeleton Image (TSSI) encoding toolkit.

Converts estimated human skeleton keypoint sequences into fixed-width RGB
images whose columns follow a depth-first tree traversal of the skeleton,
rows follow time, and channels hold the (x, y, z) coordinates. Includes
preprocessing, augmentation, batch encoding, and a CLI.
"""

from .augment import (
    AugmentationConfig,
    AugmentationPlan,
    flip_skeleton,
    plan_rng,
    sample_plan,
    scale_skeleton,
    speed_resample,
)
from .dataset import (
    DatasetManifest,
    DatasetStats,
    EncodeOptions,
    EncodeSummary,
    ManifestItem,
    compute_stats,
    encode_dataset,
    load_manifest,
    read_keypoints,
    save_manifest,
    write_keypoints,
)
from .encode import TssiImage, assemble, export, fit_height, read_raw, resize_rows
from .errors import (
    CycleDetected,
    Disconnected,
    EmptyOrder,
    EmptySequence,
    EmptySplit,
    FactorOutOfRange,
    InvalidMirrorTable,
    IoFailure,
    MissingPoseBlock,
    MissingStats,
    NonPositiveFrameSize,
    ParseError,
    SchemaVersionMismatch,
    TssiError,
)
from .sequence import (
    KeypointFrame,
    PreprocessedSequence,
    SkeletonSequence,
    filter_frames,
    impute_frame,
    normalize_frame,
    preprocess,
)
from .topology import (
    Diagnostic,
    JointDescriptor,
    JointOrder,
    MirrorTable,
    SkeletonGraph,
    build_default_graph,
    build_mirror_table,
    euler_traversal,
    load_topology,
    parse_topology,
    validate_graph,
)

__version__ = "0.1.0"
