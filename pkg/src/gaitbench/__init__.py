"""Corruption benchmark toolkit for gait recognition: perturbation kernels,
retrieval and robustness metrics, evaluation protocols and distillation losses."""

__version__ = "0.1.0"

from .core import (
    ALL_KINDS,
    KIND_FAMILY,
    SEVERITIES,
    SEVERITY_TABLE,
    CorruptionSpec,
    Family,
    FrameSequence,
    Kind,
    SeededRng,
    denormalize,
    derive_seed,
    family_of,
    normalize,
    severity_params,
)
from .engine import CorruptionResult, apply_corruption, corrupt, resolved_params
from .errors import *  # noqa: F401,F403
from .losses import (
    EmbeddingBatch,
    LossConfig,
    LossWeights,
    contrastive_loss,
    distillation_losses,
    softmax_loss,
    total_loss,
    triplet_loss,
)
from .metrics import (
    AccuracyPair,
    EmbeddingRecord,
    mask_iou,
    mean_average_precision,
    rank_k_accuracy,
    retrieval_scores,
    robustness,
)
from .occlusion import MaskEntry, MaskPack, load_mask_pack, save_mask_pack
from .protocols import (
    MixRatio,
    ProtocolSpec,
    SeverityDistribution,
    assign_corruptions,
    build_noisy_gallery,
    build_training_mix,
    load_protocol,
    split,
)
from .report import RobustnessReport, build_report, comparison_tables, load_report
