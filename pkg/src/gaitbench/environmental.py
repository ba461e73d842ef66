"""Visibility corruptions: vignette low light, fog, rain streaks and snow glare.

Constants that the severity schedule leaves open are module-level so they
can be echoed into corruption manifests.
"""

from __future__ import annotations

import math

import numpy as np
from scipy import ndimage

from .core import FrameSequence, Kind, as_rng, map_frames, severity_params

VIGNETTE_SLOPE = 0.18
FOG_ALPHA_SLOPE = 0.08
FOG_ALPHA_OFFSET = 0.1
RAIN_SLANT_DEG = 10.0
RAIN_GRAY = 200.0 / 255.0
RAIN_BLUR_TAPS = (0.25, 0.5, 0.25)
# pixels of frame area per drop, by rain type
RAIN_AREA_PER_DROP = {"drizzle": 770, None: 600, "heavy": 600, "torrential": 500}
SNOW_WHITEN = 0.5


def vignette_mask(height: int, width: int, strength: float) -> np.ndarray:
    """Multiplicative mask falling linearly from 1 at the center to
    ``1 - 0.18 * strength`` at the corners."""
    yy, xx = np.mgrid[0:height, 0:width].astype(np.float64)
    cy, cx = (height - 1) / 2.0, (width - 1) / 2.0
    r = np.hypot(yy - cy, xx - cx)
    r_max = math.hypot(cy, cx)
    if r_max == 0:
        return np.ones((height, width))
    return np.clip(1.0 - strength * VIGNETTE_SLOPE * r / r_max, 0.0, 1.0)


def low_light(seq: FrameSequence, severity: int, rng=None, *, workers: int = 1) -> FrameSequence:
    (strength,) = severity_params(Kind.LOW_LIGHT, severity)
    mask = vignette_mask(seq.height, seq.width, strength)[:, :, None]
    return map_frames(lambda x, _: x * mask, seq, None, workers)


def fog_weight(severity: int) -> float:
    """Blend weight of the white layer: density times layer opacity."""
    (density,) = severity_params(Kind.FOG, severity)
    alpha = FOG_ALPHA_SLOPE * density + FOG_ALPHA_OFFSET
    return alpha * density


def fog(seq: FrameSequence, severity: int, rng=None, *, workers: int = 1) -> FrameSequence:
    """Blend every pixel toward white by a uniform weight.

    The layer is spatially uniform so contrast can only shrink; a
    non-uniform haze would add structure to flat frames.
    """
    w = fog_weight(severity)
    return map_frames(lambda x, _: (1.0 - w) * x + w, seq, None, workers)


def rain_drop_count(height: int, width: int, rain_type) -> int:
    return max(1, (height * width) // RAIN_AREA_PER_DROP[rain_type])


def rain_layer(height: int, width: int, severity: int, gen: np.random.Generator) -> np.ndarray:
    """Streak opacity in [0, 1]; zero everywhere no streak touches."""
    _, length, rain_type = severity_params(Kind.RAIN, severity)
    n = rain_drop_count(height, width, rain_type)
    slant = math.radians(gen.uniform(-RAIN_SLANT_DEG, RAIN_SLANT_DEG))
    y0 = gen.integers(0, height, n)
    x0 = gen.integers(0, width, n)
    t = np.arange(length)
    ys = np.rint(y0[:, None] + t[None, :] * math.cos(slant)).astype(int)
    xs = np.rint(x0[:, None] + t[None, :] * math.sin(slant)).astype(int)
    keep = (ys >= 0) & (ys < height) & (xs >= 0) & (xs < width)
    alpha = np.zeros((height, width))
    alpha[ys[keep], xs[keep]] = 1.0
    # near-vertical streaks, so a vertical 3-tap blur runs along them
    return ndimage.correlate1d(alpha, RAIN_BLUR_TAPS, axis=0, mode="constant")


def rain(seq: FrameSequence, severity: int, rng, *, workers: int = 1) -> FrameSequence:
    brightness = severity_params(Kind.RAIN, severity)[0]

    def kernel(x, g):
        a = rain_layer(x.shape[0], x.shape[1], severity, g)[:, :, None]
        return (x * (1.0 - a) + RAIN_GRAY * a) * brightness

    return map_frames(kernel, seq, as_rng(rng), workers)


def snow_mask(x: np.ndarray, coef: float) -> np.ndarray:
    """Pixels whose HLS lightness lies strictly above the (1 - coef) quantile."""
    lightness = (x.max(axis=2) + x.min(axis=2)) / 2.0
    # 'higher' keeps the selected share at or below coef even with ties
    threshold = np.quantile(lightness, 1.0 - coef, method="higher")
    return lightness > threshold


def snow(seq: FrameSequence, severity: int, rng=None, *, workers: int = 1) -> FrameSequence:
    (coef,) = severity_params(Kind.SNOW, severity)

    def kernel(x, _):
        sel = snow_mask(x, coef)
        out = x.copy()
        out[sel] += (1.0 - out[sel]) * SNOW_WHITEN
        return out * (1.0 + coef)

    return map_frames(kernel, seq, None, workers)
