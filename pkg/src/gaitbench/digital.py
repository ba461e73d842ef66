"""Camera/sensor corruption kernels: four noise models and four blur/zoom warps.

All kernels work on [0, 1] floats internally and emit uint8 sequences of the
same shape. Noise is drawn from per-frame RNG streams.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .core import (
    FrameSequence,
    Kind,
    as_rng,
    denormalize,
    map_frames,
    normalize,
    severity_params,
)
from .errors import FrameTooSmall

ZOOM_BLUR_STEP = 0.01
BORDER_MODE = "reflect"


# -- noise ---------------------------------------------------------------------


def gaussian_noise(seq: FrameSequence, severity: int, rng, *, workers: int = 1) -> FrameSequence:
    (sigma,) = severity_params(Kind.GAUSSIAN_NOISE, severity)
    return map_frames(lambda x, g: x + g.normal(0.0, sigma, x.shape), seq, as_rng(rng), workers)


def speckle_noise(seq: FrameSequence, severity: int, rng, *, workers: int = 1) -> FrameSequence:
    """Multiplicative noise: ``x + x * N(0, c^2)``."""
    (scale,) = severity_params(Kind.SPECKLE_NOISE, severity)
    return map_frames(lambda x, g: x + x * g.normal(0.0, scale, x.shape), seq, as_rng(rng), workers)


def shot_noise(seq: FrameSequence, severity: int, rng, *, workers: int = 1) -> FrameSequence:
    """Poisson photon noise at ``rate`` photons per unit intensity."""
    (rate,) = severity_params(Kind.SHOT_NOISE, severity)
    return map_frames(lambda x, g: g.poisson(x * rate) / rate, seq, as_rng(rng), workers)


def impulse_noise(
    seq: FrameSequence, severity: int, rng, *, amount: float | None = None, workers: int = 1
) -> FrameSequence:
    """Salt-and-pepper noise.

    Each pixel is hit with probability ``amount`` and then set to black or
    white with equal odds, all three channels together. ``amount`` overrides
    the schedule (for milder custom variants).
    """
    if amount is None:
        (amount,) = severity_params(Kind.IMPULSE_NOISE, severity)
    if not 0.0 <= amount <= 1.0:
        raise ValueError(f"impulse amount must be in [0, 1], got {amount}")

    def kernel(x, g):
        h, w = x.shape[:2]
        hit = g.random((h, w)) < amount
        salt = g.random((h, w)) < 0.5
        out = x.copy()
        out[hit & salt] = 1.0
        out[hit & ~salt] = 0.0
        return out

    return map_frames(kernel, seq, as_rng(rng), workers)


# -- blur ----------------------------------------------------------------------


@dataclass(frozen=True)
class DiskKernel:
    radius: int
    alias_sigma: float
    taps: np.ndarray

    @classmethod
    def build(cls, radius: int, alias_sigma: float) -> "DiskKernel":
        # one pixel of halo for the anti-aliasing gaussian to spread into
        half = radius + 1
        coords = np.arange(-half, half + 1)
        xx, yy = np.meshgrid(coords, coords)
        disk = (xx**2 + yy**2 <= radius**2).astype(np.float64)
        disk /= disk.sum()
        if alias_sigma > 0:
            disk = ndimage.gaussian_filter(disk, alias_sigma, mode="constant")
        disk = np.clip(disk, 0.0, None)
        disk /= disk.sum()
        disk.setflags(write=False)
        return cls(radius, alias_sigma, disk)


def _filter_rgb(x: np.ndarray, taps: np.ndarray) -> np.ndarray:
    return ndimage.correlate(x, taps[:, :, None], mode=BORDER_MODE)


def defocus_blur(seq: FrameSequence, severity: int, rng=None, *, workers: int = 1) -> FrameSequence:
    radius, alias = severity_params(Kind.DEFOCUS_BLUR, severity)
    if seq.height <= 2 * radius or seq.width <= 2 * radius:
        raise FrameTooSmall(
            f"defocus radius {radius} needs frames larger than {2 * radius}px, got {seq.height}x{seq.width}"
        )
    taps = DiskKernel.build(radius, alias).taps
    return map_frames(lambda x, _: _filter_rgb(x, taps), seq, None, workers)


def center_zoom(x: np.ndarray, factor: float) -> np.ndarray:
    """Scale a HxWxC float image about its center, keeping HxW (bilinear, edge clamp)."""
    if factor == 1.0:
        return x.copy()
    h, w = x.shape[:2]
    cy, cx = (h - 1) / 2.0, (w - 1) / 2.0
    inv = 1.0 / factor
    return ndimage.affine_transform(
        x,
        np.diag([inv, inv, 1.0]),
        offset=[cy - cy * inv, cx - cx * inv, 0.0],
        order=1,
        mode="nearest",
    )


def zoom_blur_factors(severity: int) -> np.ndarray:
    lo, hi = severity_params(Kind.ZOOM_BLUR, severity)
    n = int(round((hi - lo) / ZOOM_BLUR_STEP))
    return lo + ZOOM_BLUR_STEP * np.arange(n + 1)


def zoom_blur(seq: FrameSequence, severity: int, rng=None, *, workers: int = 1) -> FrameSequence:
    """Average of center zooms at factors 1.00, 1.01, ... up to the scheduled maximum."""
    factors = zoom_blur_factors(severity)

    def kernel(x, _):
        acc = np.zeros_like(x)
        for z in factors:
            acc += center_zoom(x, float(z))
        return acc / len(factors)

    return map_frames(kernel, seq, None, workers)


def motion_kernel(radius: int, sigma: float, angle_deg: float) -> np.ndarray:
    """One-sided line kernel with gaussian falloff, splatted bilinearly.

    The trail points along ``angle_deg`` (0 = +x, 90 = +y in image rows), so a
    bright point smears into the pixels at ``p + k * dir`` for k in 0..radius.
    """
    size = 2 * radius + 1
    taps = np.zeros((size, size))
    theta = math.radians(angle_deg)
    # snap cos(90deg) ~ 6e-17 and friends to exact zeros
    dy, dx = round(math.sin(theta), 12), round(math.cos(theta), 12)
    for k in range(radius + 1):
        weight = math.exp(-(k * k) / (2.0 * sigma * sigma))
        # correlation reads x[p + q - c], so the tap for offset +k*dir sits at c - k*dir
        py, px = radius - k * dy, radius - k * dx
        y0, x0 = math.floor(py), math.floor(px)
        fy, fx = py - y0, px - x0
        for yy, wy in ((y0, 1.0 - fy), (y0 + 1, fy)):
            for xx, wx in ((x0, 1.0 - fx), (x0 + 1, fx)):
                if wy * wx > 0.0 and 0 <= yy < size and 0 <= xx < size:
                    taps[yy, xx] += weight * wy * wx
    return taps / taps.sum()


def motion_blur(
    seq: FrameSequence, severity: int, rng, *, angle: float | None = None, workers: int = 1
) -> FrameSequence:
    """Directional blur; one angle per sequence, drawn from the sequence stream
    in [0, 180) unless ``angle`` is given."""
    radius, sigma = severity_params(Kind.MOTION_BLUR, severity)
    if angle is None:
        angle = motion_angle(rng)
    taps = motion_kernel(radius, sigma, angle)
    return map_frames(lambda x, _: _filter_rgb(x, taps), seq, None, workers)


def motion_angle(rng) -> float:
    return float(as_rng(rng).stream().uniform(0.0, 180.0))


def zoom_in_factors(severity: int, n_frames: int) -> np.ndarray:
    (zmax,) = severity_params(Kind.ZOOM_IN, severity)
    if n_frames == 1:
        return np.array([zmax])
    return 1.0 + (zmax - 1.0) * np.arange(n_frames) / (n_frames - 1)


def zoom_in(seq: FrameSequence, severity: int, rng=None, *, workers: int = 1) -> FrameSequence:
    """Progressive zoom: frame t is magnified by 1 + (zmax - 1) * t / (T - 1)."""
    factors = zoom_in_factors(severity, len(seq))
    frames = [
        seq[t].copy() if factors[t] == 1.0 else denormalize(center_zoom(normalize(seq[t]), float(factors[t])))
        for t in range(len(seq))
    ]
    return seq.replace(np.stack(frames))
