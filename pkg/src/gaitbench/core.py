"""Shared domain types: corruption taxonomy, severity schedules, seeded RNG,
pixel normalization and the immutable FrameSequence container."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from enum import Enum
from typing import Iterator

import numpy as np

from .errors import InvalidSequence, InvalidSeverity, UnknownCorruption

SEVERITIES = (1, 2, 3, 4, 5)


class Family(str, Enum):
    DIGITAL = "digital"
    TEMPORAL = "temporal"
    ENVIRONMENTAL = "environmental"
    OCCLUSION = "occlusion"


class Kind(str, Enum):
    GAUSSIAN_NOISE = "gaussian_noise"
    SPECKLE_NOISE = "speckle_noise"
    SHOT_NOISE = "shot_noise"
    IMPULSE_NOISE = "impulse_noise"
    DEFOCUS_BLUR = "defocus_blur"
    ZOOM_BLUR = "zoom_blur"
    MOTION_BLUR = "motion_blur"
    ZOOM_IN = "zoom_in"
    FREEZE = "freeze"
    SAMPLING = "sampling"
    LOW_LIGHT = "low_light"
    FOG = "fog"
    RAIN = "rain"
    SNOW = "snow"
    OCCLUSION = "occlusion"


KIND_FAMILY: dict[Kind, Family] = {
    Kind.GAUSSIAN_NOISE: Family.DIGITAL,
    Kind.SPECKLE_NOISE: Family.DIGITAL,
    Kind.SHOT_NOISE: Family.DIGITAL,
    Kind.IMPULSE_NOISE: Family.DIGITAL,
    Kind.DEFOCUS_BLUR: Family.DIGITAL,
    Kind.ZOOM_BLUR: Family.DIGITAL,
    Kind.MOTION_BLUR: Family.DIGITAL,
    # focal zoom is a temporal corruption even though it is a per-frame warp
    Kind.ZOOM_IN: Family.TEMPORAL,
    Kind.FREEZE: Family.TEMPORAL,
    Kind.SAMPLING: Family.TEMPORAL,
    Kind.LOW_LIGHT: Family.ENVIRONMENTAL,
    Kind.FOG: Family.ENVIRONMENTAL,
    Kind.RAIN: Family.ENVIRONMENTAL,
    Kind.SNOW: Family.ENVIRONMENTAL,
    Kind.OCCLUSION: Family.OCCLUSION,
}

ALL_KINDS: tuple[Kind, ...] = tuple(Kind)

# One parameter tuple per severity level 1..5.
#   gaussian_noise  (sigma,)
#   speckle_noise   (scale,)
#   shot_noise      (photon_rate,)
#   impulse_noise   (amount,)
#   defocus_blur    (radius, alias_sigma)
#   zoom_blur       (zoom_min, zoom_max)
#   motion_blur     (radius, sigma)
#   zoom_in         (zoom_max,)
#   freeze          (repeat_fraction,)   non-monotone on purpose
#   sampling        (rate,)
#   low_light       (vignette_strength,)
#   fog             (fog_coef,)
#   rain            (brightness, drop_length, rain_type)
#   snow            (snow_coef,)
#   occlusion       (area_quintile, frame_area_fraction)
SEVERITY_TABLE: dict[Kind, tuple[tuple, ...]] = {
    Kind.GAUSSIAN_NOISE: ((0.08,), (0.12,), (0.18,), (0.26,), (0.38,)),
    Kind.SPECKLE_NOISE: ((0.15,), (0.2,), (0.25,), (0.3,), (0.35,)),
    Kind.SHOT_NOISE: ((250,), (100,), (50,), (30,), (15,)),
    Kind.IMPULSE_NOISE: ((0.03,), (0.06,), (0.09,), (0.17,), (0.27,)),
    Kind.DEFOCUS_BLUR: ((3, 0.1), (4, 0.2), (6, 0.3), (8, 0.4), (10, 0.5)),
    Kind.ZOOM_BLUR: ((1.0, 1.11), (1.0, 1.16), (1.0, 1.21), (1.0, 1.26), (1.0, 1.31)),
    Kind.MOTION_BLUR: ((10, 3), (15, 5), (15, 8), (15, 12), (20, 15)),
    Kind.ZOOM_IN: ((1.5,), (2.0,), (2.5,), (3.0,), (3.5,)),
    Kind.FREEZE: ((0.40,), (0.20,), (0.10,), (0.05,), (0.10,)),
    Kind.SAMPLING: ((2,), (4,), (8,), (16,), (32,)),
    Kind.LOW_LIGHT: ((1,), (2,), (3,), (4,), (5,)),
    Kind.FOG: ((0.49,), (0.59,), (0.69,), (0.79,), (0.89,)),
    Kind.RAIN: (
        (0.7, 5, "drizzle"),
        (0.7, 15, "drizzle"),
        (0.6, 20, None),
        (0.55, 40, "heavy"),
        (0.5, 50, "torrential"),
    ),
    Kind.SNOW: ((0.05,), (0.1,), (0.15,), (0.2,), (0.25,)),
    Kind.OCCLUSION: ((1, 0.05), (2, 0.10), (3, 0.18), (4, 0.28), (5, 0.40)),
}


def as_kind(kind: Kind | str) -> Kind:
    if isinstance(kind, Kind):
        return kind
    try:
        return Kind(str(kind).lower())
    except ValueError:
        raise UnknownCorruption(f"unknown corruption kind {kind!r}") from None


def check_severity(severity: int) -> int:
    if isinstance(severity, bool) or int(severity) != severity or severity not in SEVERITIES:
        raise InvalidSeverity(f"severity must be one of 1..5, got {severity!r}")
    return int(severity)


def severity_params(kind: Kind | str, severity: int) -> tuple:
    """Return the schedule entry for ``kind`` at ``severity`` (1 = mildest)."""
    return SEVERITY_TABLE[as_kind(kind)][check_severity(severity) - 1]


def family_of(kind: Kind | str) -> Family:
    return KIND_FAMILY[as_kind(kind)]


def round_half_away(x):
    """Round half away from zero; works on scalars and arrays."""
    x = np.asarray(x, dtype=np.float64)
    out = np.where(x >= 0, np.floor(x + 0.5), np.ceil(x - 0.5))
    return out if out.ndim else float(out)


def round_count(x: float) -> int:
    return int(round_half_away(x))


def normalize(frame: np.ndarray) -> np.ndarray:
    return np.asarray(frame, dtype=np.float64) / 255.0


def denormalize(frame: np.ndarray) -> np.ndarray:
    scaled = np.clip(frame, 0.0, 1.0) * 255.0
    return round_half_away(scaled).astype(np.uint8)


class SeededRng:
    """Counter-based seed holder handing out reproducible PCG64 streams.

    ``stream()`` gives the sequence-level generator and ``child(i)`` the
    generator for frame ``i``; both restart from the beginning on every call,
    so the order in which frames are processed cannot change any draw.
    """

    def __init__(self, seed: int):
        seed = int(seed)
        if not 0 <= seed < 2**64:
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {seed}")
        self.seed = seed

    def _gen(self, *key: int) -> np.random.Generator:
        return np.random.Generator(np.random.PCG64(np.random.SeedSequence(self.seed, spawn_key=key)))

    def stream(self) -> np.random.Generator:
        return self._gen(0)

    def child(self, index: int) -> np.random.Generator:
        return self._gen(1, int(index))

    def __repr__(self) -> str:
        return f"SeededRng({self.seed})"


def as_rng(rng) -> SeededRng:
    """Accept a SeededRng or a bare integer seed."""
    return rng if isinstance(rng, SeededRng) else SeededRng(rng)


def derive_seed(seed: int, *labels) -> int:
    """Stable 64-bit seed for a (seed, labels...) tuple, independent of run order."""
    h = hashlib.sha256(repr((int(seed),) + tuple(str(x) for x in labels)).encode())
    return int.from_bytes(h.digest()[:8], "little")


@dataclass(frozen=True)
class CorruptionSpec:
    kind: Kind
    severity: int
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "kind", as_kind(self.kind))
        object.__setattr__(self, "severity", check_severity(self.severity))
        SeededRng(self.seed)

    @property
    def family(self) -> Family:
        return KIND_FAMILY[self.kind]

    @property
    def params(self) -> tuple:
        return severity_params(self.kind, self.severity)

    def to_dict(self) -> dict:
        return {
            "family": self.family.value,
            "kind": self.kind.value,
            "severity": self.severity,
            "seed": self.seed,
        }


class FrameSequence:
    """Read-only stack of RGB uint8 frames, shape (T, H, W, 3)."""

    def __init__(self, frames, source_id: str = ""):
        arr = np.array(frames, copy=True)
        if arr.ndim == 3:
            arr = np.repeat(arr[..., None], 3, axis=-1)
        if arr.ndim != 4 or arr.shape[-1] != 3:
            raise InvalidSequence(f"expected (T, H, W, 3) frames, got shape {arr.shape}")
        if arr.shape[0] < 1:
            raise InvalidSequence("a sequence needs at least one frame")
        if arr.dtype != np.uint8:
            if not np.issubdtype(arr.dtype, np.integer) or arr.min() < 0 or arr.max() > 255:
                raise InvalidSequence("pixel values must be 8-bit integers in [0, 255]")
            arr = arr.astype(np.uint8)
        arr.setflags(write=False)
        self._data = arr
        self.source_id = source_id

    @property
    def data(self) -> np.ndarray:
        return self._data

    @property
    def frames(self) -> list[np.ndarray]:
        return list(self._data)

    @property
    def height(self) -> int:
        return self._data.shape[1]

    @property
    def width(self) -> int:
        return self._data.shape[2]

    @property
    def channels(self) -> int:
        return 3

    def __len__(self) -> int:
        return self._data.shape[0]

    def __iter__(self) -> Iterator[np.ndarray]:
        return iter(self._data)

    def __getitem__(self, i) -> np.ndarray:
        return self._data[i]

    def __eq__(self, other) -> bool:
        if not isinstance(other, FrameSequence):
            return NotImplemented
        return self._data.shape == other._data.shape and bool(np.array_equal(self._data, other._data))

    __hash__ = None

    def __repr__(self) -> str:
        t, h, w, _ = self._data.shape
        return f"FrameSequence(T={t}, {h}x{w}, source_id={self.source_id!r})"

    def replace(self, frames) -> "FrameSequence":
        return FrameSequence(frames, source_id=self.source_id)

    def digest(self) -> str:
        """SHA-256 of the decoded pixel content (shape header + raw bytes)."""
        h = hashlib.sha256()
        h.update(np.asarray(self._data.shape, dtype="<u4").tobytes())
        h.update(np.ascontiguousarray(self._data).tobytes())
        return h.hexdigest()


def map_frames(fn, seq: FrameSequence, rng: SeededRng | None, workers: int = 1) -> FrameSequence:
    """Apply ``fn(float_frame, frame_rng) -> float_frame`` to every frame.

    Each frame gets ``rng.child(index)``, so thread count and completion order
    never change the result.
    """

    def one(i: int) -> np.ndarray:
        gen = rng.child(i) if rng is not None else None
        return denormalize(fn(normalize(seq[i]), gen))

    idx = range(len(seq))
    if workers > 1 and len(seq) > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=workers) as pool:
            out = list(pool.map(one, idx))
    else:
        out = [one(i) for i in idx]
    return seq.replace(np.stack(out))
