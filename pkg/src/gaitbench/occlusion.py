"""Static occluders pasted from a pack of object masks.

Severity picks an area quintile of the pack (1 = smallest objects) and sets
how much of the frame the pasted object's bounding box covers.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
from PIL import Image, ImageDraw

from .core import FrameSequence, Kind, as_rng, severity_params
from .errors import MaskPackError, PackTooSmall

FILL_GRAY = 128
MIN_INSIDE_FRACTION = 0.5
PLACEMENT_TRIES = 1000
INDEX_NAME = "index.jsonl"


@dataclass(frozen=True)
class MaskEntry:
    mask_id: str
    mask: np.ndarray
    texture: np.ndarray | None = None
    area: int = field(init=False)

    def __post_init__(self):
        mask = np.asarray(self.mask).astype(bool)
        if mask.ndim != 2 or not mask.any():
            raise MaskPackError(f"mask {self.mask_id!r} must be a non-empty 2-D mask")
        if self.texture is not None:
            tex = np.asarray(self.texture, dtype=np.uint8)
            if tex.shape != mask.shape + (3,):
                raise MaskPackError(f"texture for {self.mask_id!r} has shape {tex.shape}, mask is {mask.shape}")
            object.__setattr__(self, "texture", tex)
        object.__setattr__(self, "mask", mask)
        object.__setattr__(self, "mask_id", str(self.mask_id))
        object.__setattr__(self, "area", int(mask.sum()))


class MaskPack:
    """Occluder masks kept sorted by (area, mask_id)."""

    def __init__(self, entries: Iterable[MaskEntry]):
        self.entries: tuple[MaskEntry, ...] = tuple(sorted(entries, key=lambda e: (e.area, e.mask_id)))
        if len(self.entries) < 5:
            raise PackTooSmall(f"a mask pack needs at least 5 entries, got {len(self.entries)}")
        ids = [e.mask_id for e in self.entries]
        if len(set(ids)) != len(ids):
            raise MaskPackError("duplicate mask_id in pack")

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)


def severity_group(pack: MaskPack, severity: int) -> tuple[MaskEntry, ...]:
    """The severity-th area quintile of the pack."""
    quintile, _ = severity_params(Kind.OCCLUSION, severity)
    n = len(pack.entries)
    if n < 5:
        raise PackTooSmall(f"a mask pack needs at least 5 entries, got {n}")
    return pack.entries[(quintile - 1) * n // 5 : quintile * n // 5]


@dataclass(frozen=True)
class Placement:
    mask_id: str
    top: int
    left: int
    height: int
    width: int


def _crop_to_bbox(entry: MaskEntry):
    rows = np.flatnonzero(entry.mask.any(axis=1))
    cols = np.flatnonzero(entry.mask.any(axis=0))
    sl = (slice(rows[0], rows[-1] + 1), slice(cols[0], cols[-1] + 1))
    tex = entry.texture[sl] if entry.texture is not None else None
    return entry.mask[sl], tex


def _scaled_occluder(entry: MaskEntry, frame_h: int, frame_w: int, area_fraction: float):
    mask, tex = _crop_to_bbox(entry)
    bh, bw = mask.shape
    scale = math.sqrt(area_fraction * frame_h * frame_w / (bh * bw))
    nh, nw = max(1, round(bh * scale)), max(1, round(bw * scale))
    small = np.asarray(Image.fromarray(mask.astype(np.uint8) * 255).resize((nw, nh), Image.NEAREST)) > 127
    if not small.any():
        small[nh // 2, nw // 2] = True
    if tex is None:
        tex_small = np.full((nh, nw, 3), FILL_GRAY, dtype=np.uint8)
    else:
        tex_small = np.asarray(Image.fromarray(tex).resize((nw, nh), Image.BILINEAR))
    return small, tex_small


def _inside_count(prefix: np.ndarray, top: int, left: int, frame_h: int, frame_w: int) -> int:
    nh, nw = prefix.shape[0] - 1, prefix.shape[1] - 1
    r0, r1 = max(0, -top), min(nh, frame_h - top)
    c0, c1 = max(0, -left), min(nw, frame_w - left)
    if r0 >= r1 or c0 >= c1:
        return 0
    return int(prefix[r1, c1] - prefix[r0, c1] - prefix[r1, c0] + prefix[r0, c0])


def _place(mask: np.ndarray, frame_h: int, frame_w: int, gen: np.random.Generator) -> tuple[int, int]:
    nh, nw = mask.shape
    prefix = np.zeros((nh + 1, nw + 1), dtype=np.int64)
    prefix[1:, 1:] = mask.cumsum(0).cumsum(1)
    total = prefix[-1, -1]
    for _ in range(PLACEMENT_TRIES):
        top = int(gen.integers(-(nh - 1), frame_h))
        left = int(gen.integers(-(nw - 1), frame_w))
        if _inside_count(prefix, top, left, frame_h, frame_w) >= MIN_INSIDE_FRACTION * total:
            return top, left
    return (frame_h - nh) // 2, (frame_w - nw) // 2


def place_occluder(
    pack: MaskPack, severity: int, frame_h: int, frame_w: int, rng
) -> tuple[np.ndarray, np.ndarray, Placement]:
    """Draw and place one occluder. Returns (frame mask, frame-sized RGB fill, placement)."""
    gen = as_rng(rng).stream()
    group = severity_group(pack, severity)
    entry = group[int(gen.integers(len(group)))]
    _, area_fraction = severity_params(Kind.OCCLUSION, severity)
    small, tex = _scaled_occluder(entry, frame_h, frame_w, area_fraction)
    top, left = _place(small, frame_h, frame_w, gen)

    nh, nw = small.shape
    r0, r1 = max(0, -top), min(nh, frame_h - top)
    c0, c1 = max(0, -left), min(nw, frame_w - left)
    frame_mask = np.zeros((frame_h, frame_w), dtype=bool)
    fill = np.zeros((frame_h, frame_w, 3), dtype=np.uint8)
    if r0 < r1 and c0 < c1:
        dst = (slice(top + r0, top + r1), slice(left + c0, left + c1))
        frame_mask[dst] = small[r0:r1, c0:c1]
        fill[dst] = tex[r0:r1, c0:c1]
    return frame_mask, fill, Placement(entry.mask_id, top, left, nh, nw)


def composite(seq: FrameSequence, mask: np.ndarray, fill: np.ndarray) -> FrameSequence:
    out = seq.data.copy()
    out[:, mask] = fill[mask]
    return seq.replace(out)


def occlude(seq: FrameSequence, pack: MaskPack, severity: int, rng, *, workers: int = 1):
    """Paste one static occluder on every frame; returns (sequence, occluder mask)."""
    mask, fill, _ = place_occluder(pack, severity, seq.height, seq.width, rng)
    return composite(seq, mask, fill), mask


# -- on-disk packs -------------------------------------------------------------


def save_mask_pack(pack: MaskPack, directory: str | Path) -> Path:
    """Write 1-bit PNG masks (plus optional RGB textures) and an index file."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    lines = []
    for e in pack.entries:
        rec = {"mask_id": e.mask_id, "mask": f"{e.mask_id}.png", "area": e.area}
        Image.fromarray(e.mask).convert("1").save(directory / rec["mask"])
        if e.texture is not None:
            rec["texture"] = f"{e.mask_id}_texture.png"
            Image.fromarray(e.texture).save(directory / rec["texture"])
        lines.append(json.dumps(rec, sort_keys=True))
    (directory / INDEX_NAME).write_text("\n".join(lines) + "\n")
    return directory


def load_mask_pack(directory: str | Path) -> MaskPack:
    directory = Path(directory)
    index = directory / INDEX_NAME
    if not index.is_file():
        raise MaskPackError(f"no {INDEX_NAME} in {directory}")
    entries = []
    for lineno, line in enumerate(index.read_text().splitlines(), 1):
        if not line.strip():
            continue
        rec = json.loads(line)
        try:
            mask = np.asarray(Image.open(directory / rec["mask"]).convert("L")) > 127
            tex = None
            if rec.get("texture"):
                tex = np.asarray(Image.open(directory / rec["texture"]).convert("RGB"))
        except (OSError, KeyError) as exc:
            raise MaskPackError(f"{index}:{lineno}: {exc}") from exc
        entry = MaskEntry(rec["mask_id"], mask, tex)
        if int(rec["area"]) != entry.area:
            raise MaskPackError(
                f"{index}:{lineno}: area {rec['area']} does not match {entry.area} mask pixels for {rec['mask_id']!r}"
            )
        entries.append(entry)
    return MaskPack(entries)


def polygons_to_mask(polygons: Sequence[Sequence[float]], height: int, width: int) -> np.ndarray:
    """Rasterize COCO-style flat polygons ``[x1, y1, x2, y2, ...]``."""
    img = Image.new("L", (width, height), 0)
    draw = ImageDraw.Draw(img)
    for poly in polygons:
        pts = list(zip(poly[0::2], poly[1::2]))
        if len(pts) >= 3:
            draw.polygon(pts, fill=1, outline=1)
    return np.asarray(img).astype(bool)


def entries_from_coco(annotations: Iterable[dict], image_sizes: dict, images: dict | None = None) -> list[MaskEntry]:
    """Convert COCO polygon annotations into mask entries.

    ``image_sizes`` maps image_id to (height, width); ``images`` optionally
    maps image_id to an RGB array used as the occluder texture. Annotations
    without polygon segmentation (RLE, crowd) are skipped.
    """
    entries = []
    for ann in annotations:
        seg = ann.get("segmentation")
        if not isinstance(seg, list) or ann.get("iscrowd"):
            continue
        h, w = image_sizes[ann["image_id"]]
        mask = polygons_to_mask(seg, h, w)
        if not mask.any():
            continue
        tex = None
        if images is not None and ann["image_id"] in images:
            tex = np.where(mask[..., None], np.asarray(images[ann["image_id"]], dtype=np.uint8), FILL_GRAY)
        entries.append(MaskEntry(str(ann["id"]), mask, tex))
    return entries
