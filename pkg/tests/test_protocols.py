import json

import numpy as np
import pytest

from gaitbench.core import ALL_KINDS, Kind
from gaitbench.dataset_io import SequenceRecord
from gaitbench.errors import EmptySplit, InvalidConfig, MissingCounterpart
from gaitbench.protocols import (
    DEFAULT_SEEN_KINDS,
    STANDARD_MIX_RATIOS,
    MixRatio,
    ProtocolSpec,
    SeverityDistribution,
    assign_corruptions,
    build_noisy_gallery,
    build_training_mix,
    load_protocol,
    split,
    unseen_kinds,
)

CASIA_CONDS = [f"nm-0{i}" for i in range(1, 7)] + ["bg-01", "bg-02", "cl-01", "cl-02"]


def casia_manifest(n_ids=3, views=("000", "090")):
    return [
        SequenceRecord(f"{i:03d}/{c}/{v}", f"{i:03d}", c, v)
        for i in range(1, n_ids + 1)
        for c in CASIA_CONDS
        for v in views
    ]


def test_casia_partition():
    out = split(casia_manifest(), load_protocol("casia-b"))
    assert {r.condition for r in out.gallery} == {"nm-01", "nm-02", "nm-03", "nm-04"}
    assert {r.condition for r in out.probe} == {"nm-05", "nm-06", "bg-01", "bg-02", "cl-01", "cl-02"}
    assert len(out.gallery) == 3 * 4 * 2 and len(out.probe) == 3 * 6 * 2 and out.n_excluded == 0


def test_sustech_gallery_only_00nm():
    p = load_protocol("sustech1k")
    assert p.gallery_conditions == ("00-nm",)
    assert "00-nm" not in p.probe_conditions


def test_all_builtins_load():
    for name in ("casia-b", "ccpg", "sustech1k", "mevid"):
        p = load_protocol(name)
        assert p.gallery_conditions and p.probe_conditions


def test_unknown_condition_excluded():
    recs = casia_manifest(1) + [SequenceRecord("x", "001", "weird-01", "000")]
    out = split(recs, load_protocol("casia-b"))
    assert out.excluded == {"weird-01": 1}


def test_empty_split_lists_conditions():
    recs = [SequenceRecord("a", "1", "nm-01", "0")]
    with pytest.raises(EmptySplit, match="nm-01"):
        split(recs, load_protocol("casia-b"))


def test_ccpg_shared_conditions():
    p = load_protocol("ccpg")
    assert set(p.shared_conditions) == {"U0_D0", "U3_D3"}
    recs = [
        SequenceRecord("1/U0_D0/a-2", "1", "U0_D0", "a"),
        SequenceRecord("1/U0_D0/a-1", "1", "U0_D0", "a"),
        SequenceRecord("1/U1_D1/a", "1", "U1_D1", "a"),
        SequenceRecord("1/U1_D0/a", "1", "U1_D0", "a"),
    ]
    out = split(recs, p)
    assert [r.sequence_id for r in out.gallery] == ["1/U0_D0/a-1", "1/U1_D1/a"]
    assert [r.sequence_id for r in out.probe] == ["1/U0_D0/a-2", "1/U1_D0/a"]


def test_protocol_from_file(tmp_path):
    f = tmp_path / "p.json"
    f.write_text(json.dumps({"dataset": "X", "gallery_conditions": ["a"], "probe_conditions": ["b", "b"]}))
    p = load_protocol(f)
    assert p.probe_conditions == ("b",)
    with pytest.raises(InvalidConfig):
        load_protocol(tmp_path / "missing.json")
    with pytest.raises(InvalidConfig):
        ProtocolSpec("x", [], ["a"])


def many(n):
    return [SequenceRecord(f"s{i:05d}", f"id{i % 50}", "nm-01", "000") for i in range(n)]


def test_degenerate_distribution():
    out = assign_corruptions(many(200), dist=SeverityDistribution({1: 1.0}), seed=3)
    assert {r.corruption["severity"] for r in out} == {1}


def test_noisy_gallery_frequencies():
    out = build_noisy_gallery(many(10_000), seed=11)
    sev = np.array([r.corruption["severity"] for r in out])
    for level, p in {1: 0.6, 2: 0.3, 3: 0.1}.items():
        sigma = np.sqrt(p * (1 - p) / len(sev))
        assert abs((sev == level).mean() - p) <= 3 * sigma
    assert 0.58 <= (sev == 1).mean() <= 0.62
    assert {r.corruption["kind"] for r in out} == {k.value for k in ALL_KINDS}


def test_assignment_deterministic_and_order_free():
    recs = many(300)
    a = assign_corruptions(recs, seed=5)
    b = assign_corruptions(list(reversed(recs)), seed=5)
    assert [r.corruption for r in a] == [r.corruption for r in reversed(b)]
    assert a != assign_corruptions(recs, seed=6)


def test_distribution_validation():
    with pytest.raises(InvalidConfig):
        SeverityDistribution({1: 0.5, 2: 0.4})
    with pytest.raises(Exception):
        SeverityDistribution({7: 1.0})


def noisy_of(records):
    return [SequenceRecord(r.sequence_id, r.identity, r.condition, r.view, "noisy", {"kind": "fog"}) for r in records]


@pytest.mark.parametrize("ratio,n,expected", [("100:0", 100, 0), ("80:20", 100, 20), ("50:50", 100, 50), ("20:80", 100, 80), ("50:50", 11, 6)])
def test_training_mix_counts(ratio, n, expected):
    clean = many(n)
    out = build_training_mix(clean, noisy_of(clean), MixRatio.parse(ratio), seed=1)
    assert sum(r.path == "noisy" for r in out) == expected
    assert [r.sequence_id for r in out] == [r.sequence_id for r in clean]


def test_training_mix_identity_mix_returns_clean():
    clean = many(40)
    assert build_training_mix(clean, [], MixRatio.parse("100:0")) == clean


def test_training_mix_per_identity_balance():
    clean = many(500)
    out = build_training_mix(clean, noisy_of(clean), MixRatio.parse("80:20"), seed=2)
    per_id = {}
    for r in out:
        per_id.setdefault(r.identity, []).append(r.path == "noisy")
    for flags in per_id.values():
        assert abs(sum(flags) - 0.2 * len(flags)) < 1


def test_training_mix_missing_counterpart():
    clean = many(10)
    with pytest.raises(MissingCounterpart):
        build_training_mix(clean, noisy_of(clean[:2]), MixRatio.parse("20:80"))


def test_mix_ratio_parse():
    assert STANDARD_MIX_RATIOS == tuple(MixRatio.parse(s) for s in ("100:0", "80:20", "50:50", "20:80"))
    assert MixRatio.parse("80:20") == MixRatio(0.8, 0.2)
    with pytest.raises(InvalidConfig):
        MixRatio(0.7, 0.2)


def test_seen_unseen_split():
    assert len(DEFAULT_SEEN_KINDS) == 5
    assert len(unseen_kinds()) == 10
    assert Kind.FOG not in unseen_kinds()
