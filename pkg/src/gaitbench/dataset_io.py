"""Frame-sequence files, dataset trees and manifests.

Dataset layout: ``root/<identity>/<condition>/<view>/*.png``. Corrupted
copies mirror it under ``<out>/<root-name>-<kind>-s<severity>/``.
"""

from __future__ import annotations

import json
import os
import shutil
import tempfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

import numpy as np
from PIL import Image

from .core import CorruptionSpec, FrameSequence
from .engine import ENGINE_VERSION, apply_corruption
from .errors import DimMismatch, EmptySequence, SequenceIOError

MANIFEST_NAME = "manifest.json"
FRAME_PATTERN = "frame_{:06d}.png"


@dataclass
class SequenceRecord:
    """One line of a sequence manifest (JSON lines)."""

    sequence_id: str
    identity: str
    condition: str
    view: str
    path: str = ""
    corruption: dict | None = None

    def to_dict(self) -> dict:
        d = {
            "sequence_id": self.sequence_id,
            "identity": self.identity,
            "condition": self.condition,
            "view": self.view,
            "path": self.path,
        }
        if self.corruption is not None:
            d["corruption"] = dict(self.corruption)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "SequenceRecord":
        return cls(
            str(d["sequence_id"]),
            str(d["identity"]),
            str(d["condition"]),
            str(d["view"]),
            str(d.get("path", "")),
            d.get("corruption"),
        )


def write_manifest(records: Iterable[SequenceRecord], path: str | Path) -> None:
    Path(path).write_text("".join(json.dumps(r.to_dict(), sort_keys=True) + "\n" for r in records))


def read_manifest(path: str | Path) -> list[SequenceRecord]:
    return [SequenceRecord.from_dict(json.loads(line)) for line in Path(path).read_text().splitlines() if line.strip()]


def frame_files(directory: str | Path) -> list[Path]:
    return sorted(p for p in Path(directory).iterdir() if p.suffix.lower() == ".png")


def scan_dataset(root: str | Path) -> list[SequenceRecord]:
    """Every ``identity/condition/view`` directory under ``root`` holding PNG frames."""
    root = Path(root)
    out = []
    for view_dir in sorted(root.glob("*/*/*")):
        if view_dir.is_dir() and any(p.suffix.lower() == ".png" for p in view_dir.iterdir()):
            ident, cond, view = view_dir.relative_to(root).parts
            out.append(SequenceRecord(f"{ident}/{cond}/{view}", ident, cond, view, str(view_dir)))
    return out


@dataclass
class SequenceManifest:
    sequence_id: str
    identity: str
    condition: str
    view: str
    frame_paths: list[str]
    digest: str

    @classmethod
    def from_directory(cls, directory: str | Path, record: SequenceRecord) -> "SequenceManifest":
        seq = load_sequence(directory)
        return cls(
            record.sequence_id,
            record.identity,
            record.condition,
            record.view,
            [str(p) for p in frame_files(directory)],
            seq.digest(),
        )

    def verify(self) -> bool:
        frames = [_read_frame(Path(p)) for p in self.frame_paths]
        return FrameSequence(np.stack(frames)).digest() == self.digest


def _read_frame(path: Path) -> np.ndarray:
    try:
        with Image.open(path) as img:
            return np.asarray(img.convert("RGB"))
    except OSError as exc:
        raise SequenceIOError(f"cannot read frame {path}: {exc}") from exc


def load_sequence(path: str | Path, source_id: str | None = None) -> FrameSequence:
    """Load PNG frames in lexicographic filename order; grayscale becomes RGB."""
    path = Path(path)
    if not path.is_dir():
        raise SequenceIOError(f"{path} is not a directory")
    files = frame_files(path)
    if not files:
        raise EmptySequence(f"no PNG frames in {path}")
    frames = [_read_frame(p) for p in files]
    shapes = {f.shape for f in frames}
    if len(shapes) != 1:
        raise DimMismatch(f"frames in {path} have mixed sizes {sorted(shapes)}")
    return FrameSequence(np.stack(frames), source_id=str(path) if source_id is None else source_id)


@dataclass
class CorruptionManifest:
    source_sequence_id: str
    spec: CorruptionSpec
    params: dict
    output_digest: str
    source_digest: str = ""
    engine_version: str = ENGINE_VERSION
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "source_sequence_id": self.source_sequence_id,
            "corruption": self.spec.to_dict(),
            "params": self.params,
            "output_digest": self.output_digest,
            "source_digest": self.source_digest,
            "engine_version": self.engine_version,
            "extra": self.extra,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "CorruptionManifest":
        c = d["corruption"]
        return cls(
            d["source_sequence_id"],
            CorruptionSpec(c["kind"], c["severity"], c["seed"]),
            d["params"],
            d["output_digest"],
            d.get("source_digest", ""),
            d.get("engine_version", ENGINE_VERSION),
            d.get("extra", {}),
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"


def read_corruption_manifest(directory: str | Path) -> CorruptionManifest:
    return CorruptionManifest.from_dict(json.loads((Path(directory) / MANIFEST_NAME).read_text()))


def corrupt_with_manifest(seq: FrameSequence, spec: CorruptionSpec, pack=None, *, workers: int = 1, extra=None):
    """Corrupt ``seq`` and build the manifest that reproduces the result."""
    result = apply_corruption(seq, spec, pack, workers=workers)
    manifest = CorruptionManifest(
        seq.source_id,
        spec,
        result.params,
        result.sequence.digest(),
        seq.digest(),
        extra=dict(extra or {}),
    )
    return result.sequence, manifest


def regenerate(manifest: CorruptionManifest, source: FrameSequence, pack=None) -> FrameSequence:
    """Re-run a manifest against its source and check the output digest."""
    if manifest.source_digest and source.digest() != manifest.source_digest:
        raise ValueError("source sequence does not match the manifest's source digest")
    out = apply_corruption(source, manifest.spec, pack).sequence
    if out.digest() != manifest.output_digest:
        raise ValueError("regenerated output digest differs from the manifest")
    return out


def save_sequence(seq: FrameSequence, path: str | Path, manifest: CorruptionManifest | dict | None = None) -> Path:
    """Write ``frame_000000.png...`` plus ``manifest.json`` atomically.

    Frames go to a temporary sibling directory that is renamed into place,
    so a failed write never leaves anything at ``path``.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = Path(tempfile.mkdtemp(prefix=f".{path.name}.tmp-", dir=path.parent))
    try:
        for i, frame in enumerate(seq):
            Image.fromarray(frame).save(tmp / FRAME_PATTERN.format(i))
        if manifest is not None:
            body = manifest.to_json() if isinstance(manifest, CorruptionManifest) else json.dumps(manifest, indent=2, sort_keys=True) + "\n"
            (tmp / MANIFEST_NAME).write_text(body)
        if path.exists():
            trash = Path(tempfile.mkdtemp(prefix=f".{path.name}.old-", dir=path.parent))
            os.rename(path, trash / "old")
            os.rename(tmp, path)
            shutil.rmtree(trash, ignore_errors=True)
        else:
            os.rename(tmp, path)
    except BaseException as exc:
        shutil.rmtree(tmp, ignore_errors=True)
        if isinstance(exc, OSError):
            raise SequenceIOError(f"failed writing {path}: {exc}") from exc
        raise
    return path
