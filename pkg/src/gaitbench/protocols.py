"""Probe/gallery protocols, noisy-gallery assignment and clean:noisy training mixes."""

from __future__ import annotations

import json
import math
from collections import Counter, defaultdict
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path
from typing import Sequence

import numpy as np

from .core import ALL_KINDS, Kind, as_kind, check_severity, derive_seed, round_count
from .dataset_io import SequenceRecord
from .errors import EmptySplit, InvalidConfig, MissingCounterpart

BUILTIN_PROTOCOLS = {
    "casia-b": "casia-b.json",
    "ccpg": "ccpg.json",
    "sustech1k": "sustech1k.json",
    "mevid": "mevid.json",
}

# one kind per family plus a second digital kind
DEFAULT_SEEN_KINDS = (Kind.GAUSSIAN_NOISE, Kind.MOTION_BLUR, Kind.FREEZE, Kind.FOG, Kind.OCCLUSION)


def _dedupe(items) -> tuple[str, ...]:
    return tuple(dict.fromkeys(str(x) for x in items))


@dataclass(frozen=True)
class ProtocolSpec:
    dataset: str
    gallery_conditions: tuple[str, ...]
    probe_conditions: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "gallery_conditions", _dedupe(self.gallery_conditions))
        object.__setattr__(self, "probe_conditions", _dedupe(self.probe_conditions))
        if not self.gallery_conditions or not self.probe_conditions:
            raise InvalidConfig("protocol needs non-empty gallery and probe condition lists")

    @property
    def shared_conditions(self) -> tuple[str, ...]:
        return tuple(c for c in self.gallery_conditions if c in self.probe_conditions)

    def to_dict(self) -> dict:
        return {
            "dataset": self.dataset,
            "gallery_conditions": list(self.gallery_conditions),
            "probe_conditions": list(self.probe_conditions),
        }


def load_protocol(name_or_path: str | Path) -> ProtocolSpec:
    """Built-in protocol by name (casia-b, ccpg, sustech1k, mevid) or a JSON file."""
    key = str(name_or_path).lower()
    if key in BUILTIN_PROTOCOLS:
        text = resources.files("gaitbench.protocol_data").joinpath(BUILTIN_PROTOCOLS[key]).read_text()
    else:
        path = Path(name_or_path)
        if not path.is_file():
            raise InvalidConfig(f"unknown protocol {name_or_path!r}; built-ins: {sorted(BUILTIN_PROTOCOLS)}")
        text = path.read_text()
    d = json.loads(text)
    return ProtocolSpec(d["dataset"], d["gallery_conditions"], d["probe_conditions"])


@dataclass
class SplitResult:
    gallery: list
    probe: list
    excluded: Counter = field(default_factory=Counter)

    @property
    def n_excluded(self) -> int:
        return sum(self.excluded.values())


def _field(rec, name: str) -> str:
    return str(rec[name] if isinstance(rec, dict) else getattr(rec, name))


def split(records: Sequence, spec: ProtocolSpec) -> SplitResult:
    """Partition records into gallery and probe by condition label.

    Records whose condition is in neither list are dropped and counted.
    A condition listed on both sides sends the first sequence (by
    sequence_id) of each identity/view to the gallery and the rest to probe.
    """
    gallery_only = set(spec.gallery_conditions) - set(spec.probe_conditions)
    probe_only = set(spec.probe_conditions) - set(spec.gallery_conditions)
    shared = set(spec.shared_conditions)
    out = SplitResult([], [])
    shared_groups: dict[tuple, list[int]] = defaultdict(list)
    side = {}
    for i, rec in enumerate(records):
        cond = _field(rec, "condition")
        if cond in gallery_only:
            side[i] = "gallery"
        elif cond in probe_only:
            side[i] = "probe"
        elif cond in shared:
            shared_groups[(_field(rec, "identity"), cond, _field(rec, "view"))].append(i)
        else:
            out.excluded[cond] += 1
    for members in shared_groups.values():
        members.sort(key=lambda i: (_field(records[i], "sequence_id"), i))
        side[members[0]] = "gallery"
        for i in members[1:]:
            side[i] = "probe"
    for i, rec in enumerate(records):
        if i in side:
            (out.gallery if side[i] == "gallery" else out.probe).append(rec)
    if not out.gallery or not out.probe:
        seen = sorted({_field(r, "condition") for r in records})
        raise EmptySplit(
            f"{spec.dataset} split left gallery={len(out.gallery)} probe={len(out.probe)}; "
            f"conditions present: {seen}"
        )
    return out


@dataclass(frozen=True)
class SeverityDistribution:
    probabilities: dict = field(default_factory=lambda: {1: 0.6, 2: 0.3, 3: 0.1})

    def __post_init__(self):
        probs = {check_severity(int(k)): float(v) for k, v in self.probabilities.items()}
        if not probs or any(v < 0 or not math.isfinite(v) for v in probs.values()):
            raise InvalidConfig(f"invalid severity probabilities {self.probabilities}")
        if abs(sum(probs.values()) - 1.0) > 1e-12:
            raise InvalidConfig(f"severity probabilities sum to {sum(probs.values())}, not 1")
        object.__setattr__(self, "probabilities", dict(sorted(probs.items())))

    def sample(self, gen: np.random.Generator, n: int) -> np.ndarray:
        levels = np.array(list(self.probabilities))
        p = np.array(list(self.probabilities.values()))
        return levels[gen.choice(len(levels), size=n, p=p / p.sum())]


@dataclass(frozen=True)
class MixRatio:
    clean_fraction: float
    noisy_fraction: float

    def __post_init__(self):
        c, n = float(self.clean_fraction), float(self.noisy_fraction)
        if not (0 <= c <= 1 and 0 <= n <= 1) or abs(c + n - 1.0) > 1e-12:
            raise InvalidConfig(f"mix ratio must be two fractions in [0, 1] summing to 1, got {c}:{n}")

    @classmethod
    def parse(cls, text: str) -> "MixRatio":
        """``"80:20"`` -> MixRatio(0.8, 0.2)."""
        a, b = (float(x) for x in text.split(":"))
        return cls(a / (a + b), b / (a + b))


STANDARD_MIX_RATIOS = tuple(MixRatio.parse(r) for r in ("100:0", "80:20", "50:50", "20:80"))


def assign_corruptions(
    manifest: Sequence[SequenceRecord],
    kinds: Sequence = ALL_KINDS,
    dist: SeverityDistribution | None = None,
    seed: int = 0,
) -> list[SequenceRecord]:
    """Give each sequence one (kind, severity, seed), drawn reproducibly.

    Draws follow sequence_id order, so the assignment does not depend on the
    order of the input manifest.
    """
    kinds = [as_kind(k) for k in kinds]
    if not kinds:
        raise InvalidConfig("need at least one corruption kind")
    if not manifest:
        raise InvalidConfig("empty manifest")
    dist = dist or SeverityDistribution()
    order = sorted(range(len(manifest)), key=lambda i: manifest[i].sequence_id)
    gen = np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=(7,)))
    kind_draws = gen.integers(len(kinds), size=len(order))
    sev_draws = dist.sample(gen, len(order))
    out: list[SequenceRecord] = list(manifest)
    for j, i in enumerate(order):
        rec = manifest[i]
        out[i] = replace(
            rec,
            corruption={
                "kind": kinds[kind_draws[j]].value,
                "severity": int(sev_draws[j]),
                "seed": derive_seed(seed, "assign", rec.sequence_id),
            },
        )
    return out


def build_noisy_gallery(gallery_manifest, kinds=ALL_KINDS, dist=None, seed: int = 0) -> list[SequenceRecord]:
    """A fixed noisy gallery: one random corruption per gallery sequence."""
    return assign_corruptions(gallery_manifest, kinds, dist, seed)


def unseen_kinds(seen: Sequence = DEFAULT_SEEN_KINDS) -> tuple[Kind, ...]:
    seen = {as_kind(k) for k in seen}
    return tuple(k for k in ALL_KINDS if k not in seen)


def _largest_remainder(counts: dict, fraction: float, total: int, gen: np.random.Generator) -> dict:
    """Integer per-group quotas summing to ``total``, each within 1 of fraction * size."""
    exact = {g: fraction * n for g, n in counts.items()}
    quota = {g: math.floor(v) for g, v in exact.items()}
    short = total - sum(quota.values())
    groups = sorted(counts)
    tiebreak = gen.random(len(groups))
    ranked = sorted(
        (g for g in groups if exact[g] - quota[g] > 0),
        key=lambda g: (-(exact[g] - quota[g]), tiebreak[groups.index(g)]),
    )
    for g in ranked[:short]:
        quota[g] += 1
    return quota


def build_training_mix(
    clean_manifest: Sequence[SequenceRecord],
    noisy_manifest: Sequence[SequenceRecord],
    ratio: MixRatio,
    seed: int = 0,
) -> list[SequenceRecord]:
    """Swap round(noisy_fraction * N) clean sequences for their noisy versions.

    Noisy counterparts are matched by sequence_id. Each identity gives up a
    share of its sequences within one of the global fraction.
    """
    if not clean_manifest:
        raise InvalidConfig("empty clean manifest")
    n_replace = round_count(ratio.noisy_fraction * len(clean_manifest))
    if n_replace == 0:
        return list(clean_manifest)
    noisy = {r.sequence_id: r for r in noisy_manifest}
    gen = np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=(11,)))
    by_id: dict[str, list[int]] = defaultdict(list)
    for i, rec in enumerate(clean_manifest):
        by_id[rec.identity].append(i)
    quota = _largest_remainder({g: len(v) for g, v in by_id.items()}, ratio.noisy_fraction, n_replace, gen)
    out = list(clean_manifest)
    for ident in sorted(by_id):
        members = sorted(by_id[ident], key=lambda i: clean_manifest[i].sequence_id)
        for i in sorted(gen.choice(members, size=quota[ident], replace=False).tolist()):
            sid = clean_manifest[i].sequence_id
            if sid not in noisy:
                raise MissingCounterpart(f"no noisy counterpart for sequence {sid!r}")
            out[i] = noisy[sid]
    return out
