"""Small synthetic fixtures: walking-blob sequences, mask packs, dataset trees
and embedding sets. Used by the tests and for smoke runs of the CLI."""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .core import FrameSequence
from .dataset_io import SequenceRecord, save_sequence
from .metrics import EmbeddingRecord
from .occlusion import MaskEntry, MaskPack

CASIA_CONDITIONS = ("nm-01", "nm-02", "nm-03", "nm-04", "nm-05", "nm-06", "bg-01", "bg-02", "cl-01", "cl-02")


def synthetic_sequence(n_frames: int = 30, height: int = 64, width: int = 64, seed: int = 0, source_id: str = "") -> FrameSequence:
    """Textured background with an ellipse 'subject' drifting left to right."""
    gen = np.random.default_rng(seed)
    yy, xx = np.mgrid[0:height, 0:width]
    base = np.stack(
        [
            60 + 80 * yy / max(height - 1, 1),
            90 + 60 * xx / max(width - 1, 1),
            140 - 50 * (yy + xx) / max(height + width - 2, 1),
        ],
        axis=-1,
    )
    base += gen.normal(0, 6, base.shape)
    color = gen.uniform(20, 235, 3)
    frames = []
    for t in range(n_frames):
        cx = width * (0.25 + 0.5 * t / max(n_frames - 1, 1))
        cy = height * 0.5 + 2 * np.sin(t / 2.0)
        body = ((xx - cx) / (0.12 * width)) ** 2 + ((yy - cy) / (0.35 * height)) ** 2 <= 1
        f = base.copy()
        f[body] = color
        frames.append(np.clip(np.rint(f), 0, 255).astype(np.uint8))
    return FrameSequence(np.stack(frames), source_id=source_id)


def synthetic_mask_pack(n: int = 10, size: int = 48, seed: int = 0, textured: bool = True) -> MaskPack:
    """``n`` ellipse masks with strictly increasing areas."""
    gen = np.random.default_rng(seed)
    yy, xx = np.mgrid[0:size, 0:size]
    c = (size - 1) / 2
    entries = []
    for i in range(n):
        r = 2 + (size / 2 - 3) * (i + 1) / n
        aspect = gen.uniform(0.6, 1.0)
        mask = ((xx - c) / r) ** 2 + ((yy - c) / (r * aspect)) ** 2 <= 1
        tex = gen.integers(0, 256, (size, size, 3), dtype=np.uint8) if textured else None
        entries.append(MaskEntry(f"obj{i:03d}", mask, tex))
    return MaskPack(entries)


def write_synthetic_dataset(
    root: str | Path,
    n_identities: int = 2,
    conditions=("nm-01", "nm-05"),
    views=("090",),
    n_frames: int = 8,
    size: tuple[int, int] = (48, 48),
    seed: int = 0,
) -> list[SequenceRecord]:
    root = Path(root)
    records = []
    k = 0
    for i in range(n_identities):
        ident = f"{i + 1:03d}"
        for cond in conditions:
            for view in views:
                seq = synthetic_sequence(n_frames, size[0], size[1], seed=seed * 1000 + k)
                path = root / ident / cond / view
                save_sequence(seq, path)
                records.append(SequenceRecord(f"{ident}/{cond}/{view}", ident, cond, view, str(path)))
                k += 1
    return records


def synthetic_embeddings(
    n_identities: int = 5,
    conditions=CASIA_CONDITIONS,
    views=("090",),
    dim: int = 16,
    spread: float = 0.3,
    seed: int = 0,
) -> list[EmbeddingRecord]:
    """Identity-clustered gaussian embeddings, one per (identity, condition, view)."""
    gen = np.random.default_rng(seed)
    centers = gen.normal(size=(n_identities, dim))
    out = []
    for i in range(n_identities):
        for cond in conditions:
            for view in views:
                vec = centers[i] + spread * gen.normal(size=dim)
                out.append(EmbeddingRecord(f"{i + 1:03d}", cond, view, vec))
    return out
