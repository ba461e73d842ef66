"""Frame-order corruptions. Both keep the sequence length and only ever emit
frames that already exist in the input."""

from __future__ import annotations

import numpy as np

from .core import FrameSequence, Kind, as_rng, round_count, severity_params
from .errors import SequenceTooShort


def freeze_indices(n_frames: int, severity: int, rng) -> np.ndarray:
    """Sorted frame positions that will hold the previous frame."""
    if n_frames < 2:
        raise SequenceTooShort(f"freeze needs at least 2 frames, got {n_frames}")
    (fraction,) = severity_params(Kind.FREEZE, severity)
    k = min(max(1, round_count(fraction * n_frames)), n_frames - 1)
    picked = as_rng(rng).stream().choice(np.arange(1, n_frames), size=k, replace=False)
    return np.sort(picked)


def freeze_source_map(n_frames: int, severity: int, rng) -> np.ndarray:
    """Input frame index shown at each output position."""
    src = np.arange(n_frames)
    for i in freeze_indices(n_frames, severity, rng):
        # ascending order lets a hold carry through consecutive picks
        src[i] = src[i - 1]
    return src


def freeze(seq: FrameSequence, severity: int, rng, *, workers: int = 1) -> FrameSequence:
    return seq.replace(seq.data[freeze_source_map(len(seq), severity, rng)])


def sampling_source_map(n_frames: int, severity: int) -> np.ndarray:
    (rate,) = severity_params(Kind.SAMPLING, severity)
    return (np.arange(n_frames) // rate) * rate


def sampling(seq: FrameSequence, severity: int, rng=None, *, workers: int = 1) -> FrameSequence:
    """Keep every ``rate``-th frame and repeat it to restore the original length."""
    return seq.replace(seq.data[sampling_source_map(len(seq), severity)])
