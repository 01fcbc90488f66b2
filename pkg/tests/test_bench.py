"""Corpus generation, report arithmetic, plan determinism, and a small live run."""

import json

import pytest

from dicomvault.bench import (
    BenchReport,
    CorpusSpec,
    LogRow,
    Scenario,
    UserProfile,
    generate_corpus,
    load_manifest,
    reference_buckets_with_total,
    run_scenario,
    scaled_reference_buckets,
)
from dicomvault.bench.runner import _qido_plan, _wado_plan
from dicomvault.dicom import extract_dim_keys, parse_part10

from server_harness import LiveServer


def test_reference_distribution_scaled_tenth():
    buckets = scaled_reference_buckets(0.1)
    assert [count for count, _ in buckets] == [222, 112, 96, 42, 37, 35, 16, 8]
    assert [size for _, size in buckets] == [131, 290, 163, 132, 514, 394, 515, 130]


def test_reference_total_apportionment():
    buckets = reference_buckets_with_total(567)
    assert sum(count for count, _ in buckets) == 567
    # proportions stay close to the reference shape
    assert buckets[0][0] > buckets[1][0] > buckets[-1][0]


def test_generated_files_parse_and_hit_sizes(tmp_path):
    spec = CorpusSpec(buckets=[(4, 131), (3, 290), (2, 20)], seed=7)
    entries = generate_corpus(spec, tmp_path / "corpus")
    assert len(entries) == 9
    uids = {e.sop for e in entries}
    assert len(uids) == 9
    for entry in entries:
        blob = (tmp_path / "corpus" / entry.file).read_bytes()
        target = next(size for count, size in spec.buckets
                      if abs(len(blob) - size * 1024) / (size * 1024) < 0.05)
        assert target
        obj = parse_part10(blob)
        keys = extract_dim_keys(obj)
        assert keys.sop_instance_uid == entry.sop
        assert obj.frame_servable


def test_single_file_corpus(tmp_path):
    entries = generate_corpus(CorpusSpec(buckets=[(1, 131)], seed=1), tmp_path / "one")
    assert len(entries) == 1
    manifest = load_manifest(tmp_path / "one")
    assert manifest == entries


def _scenario(tmp_path, service, **kw):
    defaults = dict(
        name="mini", service=service,
        corpus=CorpusSpec(buckets=[(8, 2)], seed=3), corpus_dir=tmp_path / "corpus",
        repetitions=3, seed=3, warmup_requests=2, wado_identifiers=5,
        user_profile=UserProfile(facility_count=2),
        admin_username="admin", admin_password="adminpw")
    defaults.update(kw)
    return Scenario(**defaults)


def test_request_plan_is_deterministic(tmp_path):
    scenario = _scenario(tmp_path, "QIDO")
    entries = generate_corpus(scenario.corpus, scenario.corpus_dir)
    first = _qido_plan(scenario, entries)
    second = _qido_plan(scenario, entries)
    assert [(p.request_id, p.url) for p in first] == [(p.request_id, p.url) for p in second]
    assert len(first) == scenario.repetitions * len(scenario.qido_levels)
    wado_plan = _wado_plan(scenario, entries)
    assert len(wado_plan) == scenario.repetitions * min(5, len(entries))


def _row(mode, request_id, wait_ms, status=200, digest="d0"):
    return LogRow("QIDO", mode, request_id, status, wait_ms, digest)


def test_report_arithmetic_reproducible_from_rows():
    rows = [_row("open", f"r{i}", float(i + 1)) for i in range(10)]
    rows += [_row("protected", f"r{i}", float(2 * (i + 1))) for i in range(10)]
    report = BenchReport.from_rows("t", "QIDO", rows)
    open_waits = [r.wait_ms for r in rows if r.mode == "open"]
    assert report.open_stats.mean_ms == pytest.approx(sum(open_waits) / len(open_waits))
    assert report.overhead_ratio == pytest.approx(2.0)
    assert report.open_stats.median_ms == pytest.approx(5.5)
    assert report.mode_equivalent is True


def test_report_flags_digest_divergence():
    rows = [_row("open", "r1", 1.0, digest="aaa"), _row("protected", "r1", 2.0, digest="bbb")]
    report = BenchReport.from_rows("t", "QIDO", rows)
    assert report.mode_equivalent is False
    assert report.digest_mismatches == 1


def test_live_qido_scenario_end_to_end(tmp_path):
    server = LiveServer(tmp_path / "data").start()
    try:
        scenario = _scenario(tmp_path, "QIDO")
        report = run_scenario(scenario, server.url)
    finally:
        server.stop()
    assert report.open_stats is not None and report.protected_stats is not None
    assert report.open_stats.failures == 0
    assert report.protected_stats.failures == 0
    expected = scenario.repetitions * len(scenario.qido_levels)
    assert report.open_stats.requests == expected
    assert report.protected_stats.requests == expected
    assert report.mode_equivalent is True

    paths = report.write(tmp_path / "out")
    assert paths["json"].exists() and paths["csv"].exists() and paths["txt"].exists()
    assert paths["latency_figure"].exists() and paths["ratio_figure"].exists()
    summary = json.loads(paths["json"].read_text())
    assert summary["log_rows"] == expected * 2
    csv_lines = paths["csv"].read_text().strip().splitlines()
    assert len(csv_lines) == expected * 2 + 1
