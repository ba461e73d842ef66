"""Robustness reports: per (kind, severity) scores, deltas and family means."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .core import ALL_KINDS, SEVERITIES, Family, family_of
from .errors import ReportMergeError
from .metrics import robustness

FAMILY_AGGREGATION = "mean of delta over the (kind, severity) rows present"
# metadata keys that must agree before reports are merged side by side
MERGE_KEYS = ("protocol", "distance", "primary_metric", "gallery_mode")


@dataclass
class ReportRow:
    kind: str
    family: str
    severity: int
    scores: dict[str, float]
    delta_a: float
    delta_r: float


@dataclass
class RobustnessReport:
    metadata: dict
    clean: dict[str, float]
    rows: list[ReportRow] = field(default_factory=list)

    @property
    def primary_metric(self) -> str:
        return self.metadata.get("primary_metric", "rank1")

    def families(self) -> dict[str, dict]:
        out = {}
        for fam in Family:
            members = [r for r in self.rows if r.family == fam.value]
            if members:
                out[fam.value] = {
                    "delta_a": float(np.mean([r.delta_a for r in members])),
                    "delta_r": float(np.mean([r.delta_r for r in members])),
                    "n": len(members),
                }
        return out

    def row(self, kind: str, severity: int) -> ReportRow | None:
        for r in self.rows:
            if r.kind == kind and r.severity == severity:
                return r
        return None

    def to_dict(self) -> dict:
        return {
            "metadata": self.metadata,
            "clean": self.clean,
            "rows": [asdict(r) for r in self.rows],
            "families": self.families(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "RobustnessReport":
        return cls(d["metadata"], d["clean"], [ReportRow(**r) for r in d["rows"]])

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def to_csv(self) -> str:
        metrics = sorted(self.clean)
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["kind", "family", "severity", *metrics, "delta_a", "delta_r"])
        w.writerow(["clean", "", 0, *(self.clean[m] for m in metrics), 1.0, 1.0])
        for r in self.rows:
            w.writerow([r.kind, r.family, r.severity, *(r.scores[m] for m in metrics), r.delta_a, r.delta_r])
        return buf.getvalue()

    def write(self, stem: str | Path) -> tuple[Path, Path]:
        stem = Path(stem)
        stem.parent.mkdir(parents=True, exist_ok=True)
        jpath, cpath = stem.with_suffix(".json"), stem.with_suffix(".csv")
        jpath.write_text(self.to_json())
        cpath.write_text(self.to_csv())
        return jpath, cpath


def load_report(path: str | Path) -> RobustnessReport:
    return RobustnessReport.from_dict(json.loads(Path(path).read_text()))


def build_report(clean: dict[str, float], perturbed: dict, metadata: dict) -> RobustnessReport:
    """``perturbed`` maps (kind, severity) to a score dict like ``clean``."""
    metadata = dict(metadata)
    metadata.setdefault("primary_metric", "rank1")
    metadata.setdefault("family_aggregation", FAMILY_AGGREGATION)
    primary = metadata["primary_metric"]
    order = {k.value: i for i, k in enumerate(ALL_KINDS)}
    rows = []
    for (kind, sev), scores in sorted(perturbed.items(), key=lambda kv: (order.get(str(kv[0][0]), 99), kv[0][1])):
        kind = str(getattr(kind, "value", kind))
        da, dr = robustness(clean[primary], scores[primary])
        rows.append(ReportRow(kind, family_of(kind).value, int(sev), dict(scores), da, dr))
    return RobustnessReport(metadata, dict(clean), rows)


def _check_mergeable(reports: Sequence[RobustnessReport]) -> None:
    for key in MERGE_KEYS:
        values = {json.dumps(r.metadata.get(key), sort_keys=True) for r in reports}
        if len(values) > 1:
            raise ReportMergeError(f"reports disagree on {key!r}: {sorted(values)}")


def _fmt(v, digits: int) -> str:
    if v is None:
        return ""
    return f"{round(v, digits):.{digits}f}" if isinstance(v, float) else str(v)


def _render(header: list[str], rows: list[list], fmt: str, digits: int = 1) -> str:
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(header)
        w.writerows([["" if c is None else c for c in row] for row in rows])
        return buf.getvalue()
    lines = ["| " + " | ".join(header) + " |", "|" + "|".join("---" for _ in header) + "|"]
    lines += ["| " + " | ".join(_fmt(c, digits) for c in row) + " |" for row in rows]
    return "\n".join(lines) + "\n"


def comparison_tables(reports: Sequence[RobustnessReport], labels: Sequence[str], fmt: str = "markdown") -> str:
    """Kind x severity table of the primary metric, one column block per report,
    followed by family-level robustness."""
    if not reports:
        raise ValueError("need at least one report")
    _check_mergeable(reports)
    primary = reports[0].primary_metric
    multi = len(reports) > 1
    sev_cols = ["Clean"] + [f"Sev {s}" for s in SEVERITIES]
    header = ["Perturbation"] + [f"{lab} {c}" if multi else c for lab in labels for c in sev_cols]
    kinds = [k.value for k in ALL_KINDS if any(rep.row(k.value, s) for rep in reports for s in SEVERITIES)]
    rows = []
    for kind in kinds:
        row = [kind]
        for rep in reports:
            row.append(rep.clean[primary])
            for s in SEVERITIES:
                r = rep.row(kind, s)
                row.append(r.scores[primary] if r else None)
        rows.append(row)

    fam_header = ["Family"] + [f"{lab} {c}" if multi else c for lab in labels for c in ("delta_a", "delta_r")]
    fam_rows = []
    for fam in Family:
        row = [fam.value]
        present = False
        for rep in reports:
            agg = rep.families().get(fam.value)
            present |= agg is not None
            row += [agg["delta_a"], agg["delta_r"]] if agg else [None, None]
        if present:
            fam_rows.append(row)

    return (
        f"{primary} by perturbation and severity\n\n"
        + _render(header, rows, fmt)
        + f"\nFamily robustness ({FAMILY_AGGREGATION})\n\n"
        + _render(fam_header, fam_rows, fmt, digits=4)
    )
