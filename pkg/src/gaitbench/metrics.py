"""Probe-gallery retrieval metrics, robustness scores and mask IoU."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DimMismatch, EmptyGallery, InvalidBaseline

logger = logging.getLogger(__name__)

DISTANCES = ("euclidean", "cosine")


@dataclass(frozen=True, eq=False)
class EmbeddingRecord:
    identity: str
    condition: str
    view: str
    vector: np.ndarray
    sequence_id: str = ""

    def __post_init__(self):
        v = np.asarray(self.vector, dtype=np.float64)
        if v.ndim != 1 or v.size == 0:
            raise DimMismatch(f"embedding must be a non-empty vector, got shape {v.shape}")
        if not np.all(np.isfinite(v)):
            raise ValueError(f"non-finite embedding for {self.identity}/{self.condition}/{self.view}")
        v.setflags(write=False)
        object.__setattr__(self, "vector", v)
        for name in ("identity", "condition", "view", "sequence_id"):
            object.__setattr__(self, name, str(getattr(self, name)))

    @property
    def key(self) -> tuple[str, str, str, str]:
        return (self.identity, self.condition, self.view, self.sequence_id)


def _stack(records: Sequence[EmbeddingRecord], what: str) -> np.ndarray:
    if not records:
        raise EmptyGallery(f"empty {what} set")
    dims = {r.vector.shape[0] for r in records}
    if len(dims) != 1:
        raise DimMismatch(f"{what} embeddings have mixed dimensions {sorted(dims)}")
    return np.stack([r.vector for r in records])


def distance_matrix(probe: np.ndarray, gallery: np.ndarray, distance: str = "cosine") -> np.ndarray:
    """Pairwise distances. Cosine distance ranks exactly like euclidean distance
    between L2-normalized vectors."""
    if distance == "euclidean":
        diff = probe[:, None, :] - gallery[None, :, :]
        return np.sqrt((diff * diff).sum(axis=-1))
    if distance == "cosine":
        pn = probe / np.linalg.norm(probe, axis=1, keepdims=True).clip(min=1e-12)
        gn = gallery / np.linalg.norm(gallery, axis=1, keepdims=True).clip(min=1e-12)
        return 1.0 - pn @ gn.T
    raise ValueError(f"unknown distance {distance!r}; expected one of {DISTANCES}")


def ranked_matches(probes, gallery, distance: str = "cosine") -> list[np.ndarray]:
    """For each probe, a boolean array of identity matches in ranked order.

    Gallery entries with the probe's own (identity, condition, view,
    sequence_id) are dropped; ties (equal to 12 decimal places) keep
    gallery order. Probes with no remaining match are left out.
    """
    p = _stack(probes, "probe")
    g = _stack(gallery, "gallery")
    if p.shape[1] != g.shape[1]:
        raise DimMismatch(f"probe dim {p.shape[1]} != gallery dim {g.shape[1]}")
    # distances equal to 12 places count as ties, so gallery order decides them
    dist = np.round(distance_matrix(p, g, distance), 12)
    g_ids = np.array([r.identity for r in gallery], dtype=object)
    g_keys = [r.key for r in gallery]
    out, skipped = [], 0
    for i, probe in enumerate(probes):
        keep = np.array([k != probe.key for k in g_keys])
        order = np.flatnonzero(keep)[np.argsort(dist[i, keep], kind="stable")]
        matches = g_ids[order] == probe.identity
        if not matches.any():
            skipped += 1
            continue
        out.append(matches.astype(bool))
    if skipped:
        logger.warning("%d probe(s) have no matching identity in the gallery and were skipped", skipped)
    if not out:
        raise EmptyGallery("no probe has a matching identity in the gallery")
    return out


def _rank_k(matches: list[np.ndarray], k: int) -> float:
    return 100.0 * sum(bool(m[:k].any()) for m in matches) / len(matches)


def _average_precision(m: np.ndarray) -> float:
    hits = np.flatnonzero(m) + 1
    # correctly rounded sums keep AP and mAP independent of summation order
    return math.fsum(np.arange(1, len(hits) + 1) / hits) / len(hits)


def _mean_ap(matches: list[np.ndarray]) -> float:
    return 100.0 * math.fsum(_average_precision(m) for m in matches) / len(matches)


def rank_k_accuracy(probes, gallery, k: int = 1, distance: str = "cosine") -> float:
    """Percentage of probes with a same-identity record among their k nearest."""
    if k < 1:
        raise ValueError("k must be positive")
    return _rank_k(ranked_matches(probes, gallery, distance), k)


def mean_average_precision(probes, gallery, distance: str = "cosine") -> float:
    return _mean_ap(ranked_matches(probes, gallery, distance))


def retrieval_scores(probes, gallery, ks=(1,), with_map: bool = True, distance: str = "cosine") -> dict[str, float]:
    """Rank-k for every k in ``ks`` plus mAP from a single ranking pass."""
    matches = ranked_matches(probes, gallery, distance)
    scores = {f"rank{k}": _rank_k(matches, k) for k in ks}
    if with_map:
        scores["map"] = _mean_ap(matches)
    return scores


@dataclass(frozen=True)
class AccuracyPair:
    clean: float
    perturbed: float

    def robustness(self) -> tuple[float, float]:
        return robustness(self.clean, self.perturbed)


def robustness(clean: float, perturbed: float) -> tuple[float, float]:
    """(absolute, relative) robustness from clean and perturbed accuracy in percent.

    absolute = 1 - (clean - perturbed) / 100
    relative = 1 - (clean - perturbed) / clean
    """
    if not (math.isfinite(clean) and math.isfinite(perturbed)):
        raise InvalidBaseline(f"accuracies must be finite, got {clean}, {perturbed}")
    if clean <= 0:
        raise InvalidBaseline(f"clean accuracy must be positive, got {clean}")
    drop = clean - perturbed
    return 1.0 - drop / 100.0, 1.0 - drop / clean


def mask_iou(a: np.ndarray, b: np.ndarray) -> float:
    a = np.asarray(a).astype(bool)
    b = np.asarray(b).astype(bool)
    if a.shape != b.shape:
        raise DimMismatch(f"mask shapes differ: {a.shape} vs {b.shape}")
    union = np.count_nonzero(a | b)
    if union == 0:
        return 1.0
    return np.count_nonzero(a & b) / union
