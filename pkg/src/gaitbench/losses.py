"""Teacher/student distillation objectives on embedding batches (numpy, float64).

The total objective is a weighted sum of six terms: contrastive alignment of
student embeddings (clean and noisy inputs) to clean teacher embeddings,
cross-entropy on student logits, and batch-all triplet on student embeddings.
"""

from __future__ import annotations

import math
from dataclasses import astuple, dataclass

import numpy as np

from .errors import BatchTooSmall, InvalidLabel, InvalidLoss, NoValidTriplet

DEFAULT_TEMPERATURE = 0.07
DEFAULT_MARGIN = 0.2
COMPONENT_NAMES = (
    "con_clean",
    "con_noisy",
    "softmax_clean",
    "softmax_noisy",
    "triplet_clean",
    "triplet_noisy",
)


@dataclass(frozen=True)
class EmbeddingBatch:
    vectors: np.ndarray
    labels: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.vectors, dtype=np.float64)
        y = np.asarray(self.labels)
        if v.ndim != 2 or y.shape != (v.shape[0],):
            raise ValueError(f"expected (B, d) vectors and B labels, got {v.shape} and {y.shape}")
        if not np.all(np.isfinite(v)):
            raise InvalidLoss("embedding batch has non-finite entries")
        object.__setattr__(self, "vectors", v)
        object.__setattr__(self, "labels", y)


@dataclass(frozen=True)
class LossConfig:
    temperature: float = DEFAULT_TEMPERATURE
    margin: float = DEFAULT_MARGIN

    def __post_init__(self):
        if not self.temperature > 0:
            raise ValueError("temperature must be positive")
        if not self.margin >= 0:
            raise ValueError("margin must be non-negative")


@dataclass(frozen=True)
class LossWeights:
    con_clean: float = 1.0
    con_noisy: float = 1.0
    softmax_clean: float = 1.0
    softmax_noisy: float = 1.0
    triplet_clean: float = 1.0
    triplet_noisy: float = 1.0

    def __post_init__(self):
        for w in astuple(self):
            if not (math.isfinite(w) and w >= 0):
                raise ValueError(f"loss weights must be finite and non-negative, got {astuple(self)}")

    def as_array(self) -> np.ndarray:
        return np.array(astuple(self), dtype=np.float64)


def _matrix(x) -> np.ndarray:
    if isinstance(x, EmbeddingBatch):
        return x.vectors
    m = np.asarray(x, dtype=np.float64)
    if m.ndim != 2 or not np.all(np.isfinite(m)):
        raise InvalidLoss("expected a finite (B, d) matrix")
    return m


def _log_softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=1, keepdims=True)
    return shifted - np.log(np.exp(shifted).sum(axis=1, keepdims=True))


def contrastive_loss(teacher, student, cfg: LossConfig = LossConfig()) -> float:
    """Symmetric temperature-scaled cross-batch contrastive loss.

    Row i of ``teacher`` and ``student`` is the same sample (the positive);
    every other row is a negative. Rows are L2-normalized first.
    """
    t, s = _matrix(teacher), _matrix(student)
    if t.shape != s.shape:
        raise ValueError(f"teacher {t.shape} and student {s.shape} batches differ")
    if t.shape[0] < 2:
        raise BatchTooSmall("contrastive loss needs at least 2 rows")
    t = t / np.linalg.norm(t, axis=1, keepdims=True).clip(min=1e-12)
    s = s / np.linalg.norm(s, axis=1, keepdims=True).clip(min=1e-12)
    logits = t @ s.T / cfg.temperature
    diag = np.arange(t.shape[0])
    t2s = -_log_softmax(logits)[diag, diag].mean()
    s2t = -_log_softmax(logits.T)[diag, diag].mean()
    return float(0.5 * (t2s + s2t))


def softmax_loss(logits, labels) -> float:
    """Mean cross-entropy with a log-sum-exp shift."""
    z = _matrix(logits)
    y = np.asarray(labels)
    if y.shape != (z.shape[0],) or not np.issubdtype(y.dtype, np.integer):
        raise InvalidLabel("labels must be one integer per row")
    if np.any(y < 0) or np.any(y >= z.shape[1]):
        raise InvalidLabel(f"labels must lie in [0, {z.shape[1]})")
    return float(-_log_softmax(z)[np.arange(len(y)), y].mean())


def pairwise_euclidean(x: np.ndarray) -> np.ndarray:
    diff = x[:, None, :] - x[None, :, :]
    return np.sqrt((diff * diff).sum(axis=-1))


def triplet_loss(batch: EmbeddingBatch, cfg: LossConfig = LossConfig()) -> float:
    """Batch-all hinge triplet loss, averaged over every valid (a, p, n)."""
    x, y = batch.vectors, batch.labels
    d = pairwise_euclidean(x)
    same = y[:, None] == y[None, :]
    pos = same & ~np.eye(len(y), dtype=bool)
    neg = ~same
    valid = pos[:, :, None] & neg[:, None, :]
    if not valid.any():
        raise NoValidTriplet("batch needs an identity with two samples and a second identity")
    hinge = np.maximum(0.0, d[:, :, None] - d[:, None, :] + cfg.margin)
    return float(hinge[valid].mean())


def total_loss(components, weights: LossWeights = LossWeights()) -> float:
    """Weighted sum of the six terms, ordered as ``COMPONENT_NAMES``
    (a mapping keyed by those names also works)."""
    if isinstance(components, dict):
        components = [components[name] for name in COMPONENT_NAMES]
    c = np.asarray(components, dtype=np.float64)
    if c.shape != (6,):
        raise InvalidLoss(f"expected 6 loss components, got {c.shape}")
    if not np.all(np.isfinite(c)) or np.any(c < 0):
        raise InvalidLoss(f"loss components must be finite and non-negative, got {c.tolist()}")
    return float(weights.as_array() @ c)


def distillation_losses(
    teacher_clean,
    student_clean: EmbeddingBatch,
    student_noisy: EmbeddingBatch,
    logits_clean,
    logits_noisy,
    cfg: LossConfig = LossConfig(),
) -> dict[str, float]:
    """All six terms for one batch; pass the result to ``total_loss``."""
    return {
        "con_clean": contrastive_loss(teacher_clean, student_clean, cfg),
        "con_noisy": contrastive_loss(teacher_clean, student_noisy, cfg),
        "softmax_clean": softmax_loss(logits_clean, student_clean.labels),
        "softmax_noisy": softmax_loss(logits_noisy, student_noisy.labels),
        "triplet_clean": triplet_loss(student_clean, cfg),
        "triplet_noisy": triplet_loss(student_noisy, cfg),
    }
