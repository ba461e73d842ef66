"""Dispatch a CorruptionSpec to its kernel and record every parameter used."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import digital, environmental, occlusion, temporal
from .core import CorruptionSpec, FrameSequence, Kind, SeededRng, severity_params
from .errors import InvalidConfig

ENGINE_VERSION = "gaitbench-1"

KERNELS = {
    Kind.GAUSSIAN_NOISE: digital.gaussian_noise,
    Kind.SPECKLE_NOISE: digital.speckle_noise,
    Kind.SHOT_NOISE: digital.shot_noise,
    Kind.IMPULSE_NOISE: digital.impulse_noise,
    Kind.DEFOCUS_BLUR: digital.defocus_blur,
    Kind.ZOOM_BLUR: digital.zoom_blur,
    Kind.MOTION_BLUR: digital.motion_blur,
    Kind.ZOOM_IN: digital.zoom_in,
    Kind.FREEZE: temporal.freeze,
    Kind.SAMPLING: temporal.sampling,
    Kind.LOW_LIGHT: environmental.low_light,
    Kind.FOG: environmental.fog,
    Kind.RAIN: environmental.rain,
    Kind.SNOW: environmental.snow,
}


@dataclass
class CorruptionResult:
    sequence: FrameSequence
    params: dict
    occluder_mask: np.ndarray | None = None


def resolved_params(spec: CorruptionSpec, n_frames: int | None = None) -> dict:
    """Schedule entry plus every fixed constant the kernel uses."""
    kind, sev = spec.kind, spec.severity
    p = severity_params(kind, sev)
    rng = SeededRng(spec.seed)
    if kind is Kind.GAUSSIAN_NOISE:
        return {"sigma": p[0]}
    if kind is Kind.SPECKLE_NOISE:
        return {"scale": p[0]}
    if kind is Kind.SHOT_NOISE:
        return {"photon_rate": p[0]}
    if kind is Kind.IMPULSE_NOISE:
        return {"amount": p[0], "salt_vs_pepper": 0.5}
    if kind is Kind.DEFOCUS_BLUR:
        return {"radius": p[0], "alias_sigma": p[1], "border": digital.BORDER_MODE}
    if kind is Kind.ZOOM_BLUR:
        return {"zoom_min": p[0], "zoom_max": p[1], "step": digital.ZOOM_BLUR_STEP, "interpolation": "bilinear"}
    if kind is Kind.MOTION_BLUR:
        return {"radius": p[0], "sigma": p[1], "angle_deg": digital.motion_angle(rng), "border": digital.BORDER_MODE}
    if kind is Kind.ZOOM_IN:
        return {"zoom_max": p[0], "interpolation": "bilinear"}
    if kind is Kind.FREEZE:
        out = {"repeat_fraction": p[0]}
        if n_frames is not None and n_frames >= 2:
            out["held_indices"] = temporal.freeze_indices(n_frames, sev, rng).tolist()
        return out
    if kind is Kind.SAMPLING:
        return {"rate": p[0]}
    if kind is Kind.LOW_LIGHT:
        return {"strength": p[0], "slope": environmental.VIGNETTE_SLOPE}
    if kind is Kind.FOG:
        return {
            "fog_coef": p[0],
            "alpha": environmental.FOG_ALPHA_SLOPE * p[0] + environmental.FOG_ALPHA_OFFSET,
            "blend_weight": environmental.fog_weight(sev),
        }
    if kind is Kind.RAIN:
        return {
            "brightness": p[0],
            "drop_length": p[1],
            "rain_type": p[2],
            "area_per_drop": environmental.RAIN_AREA_PER_DROP[p[2]],
            "slant_deg": [-environmental.RAIN_SLANT_DEG, environmental.RAIN_SLANT_DEG],
            "gray": environmental.RAIN_GRAY,
            "blur_taps": list(environmental.RAIN_BLUR_TAPS),
        }
    if kind is Kind.SNOW:
        return {"snow_coef": p[0], "whiten": environmental.SNOW_WHITEN, "brightness": 1.0 + p[0]}
    if kind is Kind.OCCLUSION:
        return {
            "area_quintile": p[0],
            "frame_area_fraction": p[1],
            "fill_gray": occlusion.FILL_GRAY,
            "min_inside_fraction": occlusion.MIN_INSIDE_FRACTION,
        }
    raise AssertionError(kind)


def apply_corruption(
    seq: FrameSequence,
    spec: CorruptionSpec,
    pack: occlusion.MaskPack | None = None,
    *,
    workers: int = 1,
) -> CorruptionResult:
    rng = SeededRng(spec.seed)
    params = resolved_params(spec, len(seq))
    if spec.kind is Kind.OCCLUSION:
        if pack is None:
            raise InvalidConfig("occlusion needs a mask pack")
        mask, fill, placement = occlusion.place_occluder(pack, spec.severity, seq.height, seq.width, rng)
        params.update(
            mask_id=placement.mask_id,
            top=placement.top,
            left=placement.left,
            scaled_height=placement.height,
            scaled_width=placement.width,
        )
        return CorruptionResult(occlusion.composite(seq, mask, fill), params, mask)
    return CorruptionResult(KERNELS[spec.kind](seq, spec.severity, rng, workers=workers), params)


def corrupt(seq: FrameSequence, kind, severity: int, seed: int = 0, pack=None, *, workers: int = 1) -> FrameSequence:
    """Shorthand for ``apply_corruption(...).sequence``."""
    return apply_corruption(seq, CorruptionSpec(kind, severity, seed), pack, workers=workers).sequence
