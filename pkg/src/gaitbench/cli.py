"""``gaitbench`` command line: corrupt, evaluate, report.

Each of ``corrupt`` and ``evaluate`` reads one YAML (or JSON) config file;
flags override individual keys. Exit codes: 0 success, 1 partial failure,
2 configuration error.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import yaml

from . import __version__
from .core import ALL_KINDS, SEVERITIES, CorruptionSpec, Kind, as_kind, check_severity, derive_seed
from .dataset_io import corrupt_with_manifest, load_sequence, save_sequence, scan_dataset
from .embeddings import read_embeddings
from .engine import ENGINE_VERSION
from .errors import GaitBenchError, InvalidConfig
from .metrics import DISTANCES, retrieval_scores
from .occlusion import load_mask_pack
from .protocols import load_protocol, split
from .report import build_report, comparison_tables, load_report

logger = logging.getLogger("gaitbench")

EXIT_OK, EXIT_PARTIAL, EXIT_CONFIG = 0, 1, 2
WORKERS_ENV = "GAITBENCH_WORKERS"
SUMMARY_NAME = "corrupt_summary.json"


def _load_config(path) -> dict:
    if path is None:
        return {}
    try:
        cfg = yaml.safe_load(Path(path).read_text())
    except (OSError, yaml.YAMLError) as exc:
        raise InvalidConfig(f"cannot read config {path}: {exc}") from exc
    if cfg is None:
        return {}
    if not isinstance(cfg, dict):
        raise InvalidConfig(f"config {path} must be a mapping")
    return cfg


def _split_list(value) -> list:
    if isinstance(value, str):
        return [v.strip() for v in value.split(",") if v.strip()]
    return list(value)


def _resolve_kinds(value) -> list[Kind]:
    if value in (None, "all") or value == ["all"]:
        return list(ALL_KINDS)
    try:
        return [as_kind(k) for k in _split_list(value)]
    except KeyError as exc:
        raise InvalidConfig(str(exc)) from exc


def _resolve_severities(value) -> list[int]:
    if value in (None, "all") or value == ["all"]:
        return list(SEVERITIES)
    try:
        return [check_severity(int(s)) for s in _split_list(value)]
    except ValueError as exc:
        raise InvalidConfig(f"bad severities {value!r}: {exc}") from exc


def _resolve_workers(value) -> int:
    if value is None:
        value = os.environ.get(WORKERS_ENV, 1)
    try:
        n = int(value)
    except (TypeError, ValueError):
        raise InvalidConfig(f"workers must be an integer, got {value!r}") from None
    if n < 1:
        raise InvalidConfig(f"workers must be >= 1, got {n}")
    return n


def _override(cfg: dict, args, names) -> dict:
    cfg = dict(cfg)
    for name in names:
        v = getattr(args, name, None)
        if v is not None:
            cfg[name] = v
    return cfg


# corrupt


def resolve_corrupt_config(cfg: dict) -> dict:
    """Validate and fill defaults. Raises InvalidConfig before any work starts."""
    unknown = set(cfg) - {"input", "output", "kinds", "severities", "seed", "mask_pack", "workers"}
    if unknown:
        raise InvalidConfig(f"unknown corrupt config keys: {sorted(unknown)}")
    for key in ("input", "output"):
        if not cfg.get(key):
            raise InvalidConfig(f"corrupt config needs {key!r}")
    kinds = _resolve_kinds(cfg.get("kinds"))
    out = {
        "input": str(cfg["input"]),
        "output": str(cfg["output"]),
        "kinds": [k.value for k in kinds],
        "severities": _resolve_severities(cfg.get("severities")),
        "seed": int(cfg.get("seed", 0)),
        "mask_pack": str(cfg["mask_pack"]) if cfg.get("mask_pack") else None,
        "workers": _resolve_workers(cfg.get("workers")),
        "engine_version": ENGINE_VERSION,
    }
    if not Path(out["input"]).is_dir():
        raise InvalidConfig(f"input root {out['input']} is not a directory")
    if Kind.OCCLUSION in kinds:
        if out["mask_pack"] is None:
            raise InvalidConfig("occlusion requested but no mask_pack configured")
        try:
            load_mask_pack(out["mask_pack"])
        except GaitBenchError as exc:
            raise InvalidConfig(f"mask pack {out['mask_pack']}: {exc}") from exc
    return out


_PACK_CACHE: dict = {}


def _pack(path):
    if path is None:
        return None
    if path not in _PACK_CACHE:
        _PACK_CACHE[path] = load_mask_pack(path)
    return _PACK_CACHE[path]


def _corrupt_task(task: dict) -> tuple[str, str | None]:
    """Run one (sequence, kind, severity); returns (output path, error or None)."""
    try:
        seq = load_sequence(task["source"], source_id=task["sequence_id"])
        spec = CorruptionSpec(task["kind"], task["severity"], task["seed"])
        out, manifest = corrupt_with_manifest(
            seq, spec, _pack(task["mask_pack"]), extra={"dataset": task["dataset"], "source_path": task["source"]}
        )
        save_sequence(out, task["dest"], manifest)
        return task["dest"], None
    except Exception as exc:  # reported per sequence, the batch goes on
        return task["dest"], f"{type(exc).__name__}: {exc}"


def corrupt_tasks(cfg: dict) -> list[dict]:
    root = Path(cfg["input"])
    records = scan_dataset(root)
    if not records:
        raise InvalidConfig(f"no sequences found under {root} (expected identity/condition/view/*.png)")
    tasks = []
    for kind in cfg["kinds"]:
        for sev in cfg["severities"]:
            tree = Path(cfg["output"]) / f"{root.name}-{kind}-s{sev}"
            for rec in records:
                tasks.append(
                    {
                        "sequence_id": rec.sequence_id,
                        "source": rec.path,
                        "dataset": root.name,
                        "kind": kind,
                        "severity": sev,
                        "seed": derive_seed(cfg["seed"], rec.sequence_id, kind, sev),
                        "mask_pack": cfg["mask_pack"],
                        "dest": str(tree / rec.identity / rec.condition / rec.view),
                    }
                )
    return tasks


def run_corrupt(cfg: dict) -> dict:
    cfg = resolve_corrupt_config(cfg)
    tasks = corrupt_tasks(cfg)
    if cfg["workers"] > 1:
        with ProcessPoolExecutor(max_workers=cfg["workers"]) as pool:
            results = list(pool.map(_corrupt_task, tasks, chunksize=4))
    else:
        results = [_corrupt_task(t) for t in tasks]
    failures = [{"output": dest, "error": err} for dest, err in results if err]
    summary = {
        "config": cfg,
        "total": len(tasks),
        "succeeded": len(tasks) - len(failures),
        "failed": len(failures),
        "failures": failures,
    }
    Path(cfg["output"]).mkdir(parents=True, exist_ok=True)
    (Path(cfg["output"]) / SUMMARY_NAME).write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    return summary


def cmd_corrupt(args) -> int:
    cfg = _override(_load_config(args.config), args, ("input", "output", "seed", "workers", "kinds", "severities", "mask_pack"))
    summary = run_corrupt(cfg)
    for f in summary["failures"]:
        print(f"FAILED {f['output']}: {f['error']}", file=sys.stderr)
    print(f"corrupt: {summary['succeeded']}/{summary['total']} sequences written, {summary['failed']} failed")
    return EXIT_PARTIAL if summary["failed"] else EXIT_OK


# evaluate


def resolve_evaluate_config(cfg: dict) -> dict:
    unknown = set(cfg) - {"protocol", "clean", "perturbed", "noisy_gallery", "distance", "ks", "map", "output", "seed", "extractor", "primary_metric"}
    if unknown:
        raise InvalidConfig(f"unknown evaluate config keys: {sorted(unknown)}")
    for key in ("protocol", "clean", "output"):
        if not cfg.get(key):
            raise InvalidConfig(f"evaluate config needs {key!r}")
    perturbed = []
    for i, entry in enumerate(cfg.get("perturbed") or []):
        if not isinstance(entry, dict) or not {"kind", "severity", "path"} <= set(entry):
            raise InvalidConfig(f"perturbed[{i}] needs kind, severity and path")
        try:
            perturbed.append({"kind": as_kind(entry["kind"]).value, "severity": check_severity(int(entry["severity"])), "path": str(entry["path"])})
        except (KeyError, ValueError) as exc:
            raise InvalidConfig(f"perturbed[{i}]: {exc}") from exc
    keys = {(p["kind"], p["severity"]) for p in perturbed}
    if len(keys) != len(perturbed):
        raise InvalidConfig("perturbed entries repeat a (kind, severity) pair")
    distance = cfg.get("distance", "cosine")
    if distance not in DISTANCES:
        raise InvalidConfig(f"distance must be one of {DISTANCES}, got {distance!r}")
    ks = sorted({int(k) for k in _split_list(cfg.get("ks", [1]))})
    if not ks or ks[0] < 1:
        raise InvalidConfig(f"ks must be positive integers, got {cfg.get('ks')!r}")
    with_map = bool(cfg.get("map", True))
    primary = cfg.get("primary_metric", f"rank{ks[0]}")
    allowed = {f"rank{k}" for k in ks} | ({"map"} if with_map else set())
    if primary not in allowed:
        raise InvalidConfig(f"primary_metric {primary!r} is not among the computed metrics {sorted(allowed)}")
    try:
        protocol = load_protocol(cfg["protocol"])
    except (OSError, KeyError, ValueError) as exc:
        raise InvalidConfig(f"protocol {cfg['protocol']!r}: {exc}") from exc
    return {
        "protocol": protocol.to_dict(),
        "protocol_name": str(cfg["protocol"]),
        "clean": str(cfg["clean"]),
        "perturbed": perturbed,
        "noisy_gallery": str(cfg["noisy_gallery"]) if cfg.get("noisy_gallery") else None,
        "gallery_mode": "noisy" if cfg.get("noisy_gallery") else "clean",
        "distance": distance,
        "ks": ks,
        "map": with_map,
        "primary_metric": primary,
        "output": str(cfg["output"]),
        "seed": int(cfg.get("seed", 0)),
        "extractor": str(cfg.get("extractor", "unspecified")),
    }


def _read(path: str):
    try:
        return read_embeddings(path)
    except OSError as exc:
        raise InvalidConfig(f"cannot read embeddings {path}: {exc}") from exc


def _probe_conditions(records) -> set[str]:
    return {r.condition for r in records}


def run_evaluate(cfg: dict):
    cfg = resolve_evaluate_config(cfg)
    protocol = load_protocol(cfg["protocol_name"])
    clean = split(_read(cfg["clean"]), protocol)
    if cfg["noisy_gallery"]:
        gallery = split(_read(cfg["noisy_gallery"]), protocol).gallery
    else:
        gallery = clean.gallery
    score = lambda probes: retrieval_scores(probes, gallery, ks=cfg["ks"], with_map=cfg["map"], distance=cfg["distance"])
    clean_scores = score(clean.probe)
    want = _probe_conditions(clean.probe)
    perturbed = {}
    for entry in cfg["perturbed"]:
        probes = split(_read(entry["path"]), protocol).probe
        got = _probe_conditions(probes)
        if got != want:
            raise InvalidConfig(
                f"{entry['path']}: probe conditions differ from the clean set; "
                f"missing {sorted(want - got)}, unexpected {sorted(got - want)}"
            )
        perturbed[(entry["kind"], entry["severity"])] = score(probes)
    metadata = {k: v for k, v in cfg.items() if k != "output"}
    metadata["excluded_conditions"] = dict(sorted(clean.excluded.items()))
    metadata["engine_version"] = ENGINE_VERSION
    metadata["gaitbench_version"] = __version__
    report = build_report(clean_scores, perturbed, metadata)
    paths = report.write(cfg["output"])
    return report, paths


def cmd_evaluate(args) -> int:
    cfg = _override(_load_config(args.config), args, ("output", "seed", "protocol", "distance"))
    report, (jpath, cpath) = run_evaluate(cfg)
    print(f"evaluate: {len(report.rows)} perturbed rows, clean {report.primary_metric}={report.clean[report.primary_metric]:.2f}; wrote {jpath} and {cpath}")
    return EXIT_OK


# report


def cmd_report(args) -> int:
    try:
        reports = [load_report(p) for p in args.reports]
    except (OSError, KeyError, ValueError) as exc:
        raise InvalidConfig(f"cannot load report: {exc}") from exc
    labels = args.labels or [Path(p).stem for p in args.reports]
    if len(labels) != len(reports):
        raise InvalidConfig(f"{len(labels)} labels for {len(reports)} reports")
    text = comparison_tables(reports, labels, fmt=args.format)
    if args.output:
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="gaitbench", description="Corruption benchmark tooling for gait recognition.")
    p.add_argument("--version", action="version", version=f"gaitbench {__version__}")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("corrupt", help="write corrupted copies of a dataset tree")
    c.add_argument("config", nargs="?")
    c.add_argument("--input")
    c.add_argument("--output")
    c.add_argument("--seed", type=int)
    c.add_argument("--workers", type=int, help=f"worker processes (default ${WORKERS_ENV} or 1)")
    c.add_argument("--kinds", help="comma list or 'all'")
    c.add_argument("--severities", help="comma list or 'all'")
    c.add_argument("--mask-pack", dest="mask_pack")
    c.set_defaults(func=cmd_corrupt)

    e = sub.add_parser("evaluate", help="score embeddings and write a robustness report")
    e.add_argument("config", nargs="?")
    e.add_argument("--output", help="report path stem (.json and .csv are written)")
    e.add_argument("--seed", type=int)
    e.add_argument("--protocol")
    e.add_argument("--distance", choices=DISTANCES)
    e.set_defaults(func=cmd_evaluate)

    r = sub.add_parser("report", help="render comparison tables from report JSONs")
    r.add_argument("reports", nargs="+")
    r.add_argument("--labels", nargs="+")
    r.add_argument("--format", choices=("markdown", "csv"), default="markdown")
    r.add_argument("--output")
    r.set_defaults(func=cmd_report)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except GaitBenchError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
