import csv
import json
import random
import shutil
import time
from pathlib import Path

import pytest
import yaml

from osmon.cli import main
from osmon.config import load_config, validate_config

from conftest import FIXTURES

PIPE = FIXTURES / "pipeline"
GOLDEN = PIPE / "golden"
EXPECTED = json.loads((PIPE / "expected.json").read_text())


def run(*args) -> int:
    return main([str(a) for a in args])


@pytest.fixture(scope="module")
def golden_run(tmp_path_factory):
    out = tmp_path_factory.mktemp("golden")
    start = time.perf_counter()
    assert run("all", "--config", PIPE / "config.yaml", "--output-dir", out) == 0
    return out, time.perf_counter() - start


def table(out: Path, name: str) -> list[dict]:
    body = json.loads((out / "report.json").read_text())
    t = body["tables"][name]
    return [dict(zip(t["columns"], r)) for r in t["rows"]]


def test_golden_bytes(golden_run):
    out, elapsed = golden_run
    assert (out / "report.json").read_bytes() == (GOLDEN / "report.json").read_bytes()
    for f in sorted((GOLDEN / "tables").iterdir()):
        assert (out / "tables" / f.name).read_bytes() == f.read_bytes(), f.name
    assert elapsed < 10


def test_golden_matches_independent_counts():
    out = GOLDEN
    stages = {r["stage"]: r["count"] for r in table(out, "corpus_size")}
    for k in ("input_lines", "ingest_rejects", "records", "merged_publications", "in_perimeter",
              "in_country_perimeter", "corpus"):
        assert stages[k] == EXPECTED[k], k
    assert {r["discipline"]: r["count"] for r in table(out, "disciplines")} == EXPECTED["disciplines"]
    assert {r["country"]: r["count"] for r in table(out, "countries")} == EXPECTED["countries"]
    top = [r for r in table(out, "oa_rate") if r["year"] == "all" and r["discipline"] == "all"]
    assert {r["snapshot"]: r["open"] for r in top} == EXPECTED["open_per_snapshot"]
    for day, routes in EXPECTED["routes_per_snapshot"].items():
        got = {r["route"]: r["count"] for r in table(out, "oa_routes")
               if r["snapshot"] == day and r["year"] == "all" and r["discipline"] == "all" and r["count"]}
        assert got == routes
    for day, models in EXPECTED["business_models_per_snapshot"].items():
        got = {r["business_model"]: r["count"] for r in table(out, "oa_business_models")
               if r["snapshot"] == day and r["year"] == "all" and r["count"]}
        assert got == models
    funnel = {r["object_kind"]: [r["numerator"], r["denominator"]] for r in table(out, "mentions_funnel")}
    assert funnel == {k: v["or"] for k, v in EXPECTED["funnel"].items()}
    apc_all = [r for r in table(out, "apc") if r["year"] == "all" and r["discipline"] == "all"]
    assert sum(r["count"] for r in apc_all) == sum(EXPECTED["apc_methods_in_scope"].values())
    unknown = [r["count"] for r in apc_all if r["currency"] == "unknown"]
    assert unknown == [EXPECTED["apc_methods_in_scope"].get("unknown", 0)]


def test_stage_artifacts_match_expected(golden_run):
    out, _ = golden_run
    corpus = [json.loads(x) for x in (out / "artifacts/enrich/corpus.jsonl").read_text().splitlines()]
    pids = sorted(r["doi"] or f"{r['canonical_pid'][0]}:{r['canonical_pid'][1]}" for r in corpus)
    assert pids == EXPECTED["corpus_pids"]
    apc = json.loads((out / "artifacts/apc/stats.json").read_text())
    assert apc["methods"] == EXPECTED["apc_methods"]
    for line in (out / "artifacts/apc/estimates.jsonl").read_text().splitlines():
        e = json.loads(line)
        if e["method"] == "journal_year_average":
            assert abs(float(e["amount"]) - list(EXPECTED["apc_group_means"].values())[0]) < 1e-9
    ms = json.loads((out / "artifacts/mentions/stats.json").read_text())
    assert ms["rejects"] == EXPECTED["mention_rejects"]
    assert ms["dropped_outside_corpus"] == EXPECTED["mentions_dropped_outside_corpus"]


def test_csv_row_counts(golden_run):
    out, _ = golden_run
    body = json.loads((out / "report.json").read_text())
    for name, t in body["tables"].items():
        with open(out / "tables" / f"{name}.csv", newline="") as fh:
            assert sum(1 for _ in csv.reader(fh)) == len(t["rows"]) + 1


def test_all_equals_sequential(tmp_path, golden_run):
    out, _ = golden_run
    seq = tmp_path / "seq"
    for stage in ("ingest", "dedup", "enrich", "oa", "apc", "mentions", "report"):
        assert run(stage, "--config", PIPE / "config.yaml", "--output-dir", seq) == 0
    for f in sorted(p for p in out.rglob("*") if p.is_file() and p.name != "metadata.json"):
        assert (seq / f.relative_to(out)).read_bytes() == f.read_bytes(), f


def test_rerun_identical_and_inputs_untouched(tmp_path):
    work = tmp_path / "fx"
    shutil.copytree(PIPE, work, ignore=shutil.ignore_patterns("golden", "out"))
    before = {p.name: p.read_bytes() for p in work.iterdir() if p.is_file()}
    assert run("all", "--config", work / "config.yaml") == 0
    first = (work / "out/report.json").read_bytes()
    assert run("all", "--config", work / "config.yaml") == 0
    assert (work / "out/report.json").read_bytes() == first
    assert {p.name: p.read_bytes() for p in work.iterdir() if p.is_file()} == before


def test_permuted_inputs_same_report(tmp_path):
    work = tmp_path / "fx"
    shutil.copytree(PIPE, work, ignore=shutil.ignore_patterns("golden", "out"))
    rng = random.Random(4)
    for name in ("crossref.jsonl", "pubmed.jsonl", "repository.jsonl", "mentions.jsonl",
                 "oa-snapshot-2023-07-15.jsonl"):
        lines = (work / name).read_text().splitlines()
        rng.shuffle(lines)
        (work / name).write_text("\n".join(lines) + "\n")
    assert run("all", "--config", work / "config.yaml", "--output-dir", tmp_path / "o") == 0
    assert (tmp_path / "o/report.json").read_bytes() == (GOLDEN / "report.json").read_bytes()


def _config(tmp_path, **changes):
    raw = yaml.safe_load((PIPE / "config.yaml").read_text())
    raw.update(changes)
    work = tmp_path / "fx"
    if not work.exists():
        shutil.copytree(PIPE, work, ignore=shutil.ignore_patterns("golden", "out"))
    (work / "config.yaml").write_text(yaml.safe_dump(raw))
    return work / "config.yaml"


def test_validate_ok():
    assert validate_config(PIPE / "config.yaml") == []
    assert run("validate", "--config", PIPE / "config.yaml") == 0


@pytest.mark.parametrize("changes, field", [
    ({"apc_min_group": 0}, "apc_min_group"),
    ({"mentions_threshold": 1.5}, "mentions_threshold"),
    ({"gazetteer": "missing.csv"}, "gazetteer"),
    ({"funnel_denominator": "xor"}, "funnel_denominator"),
    ({"source_priority": ["pubmed"]}, "source_priority"),
    ({"snapshots": ["oa-snapshot-2024-01-15.jsonl", "oa-snapshot-2023-01-15.jsonl"]}, "snapshots"),
    ({"perimeter": {"year_min": 2020}}, "perimeter.year_max"),
])
def test_validate_errors(tmp_path, changes, field):
    errors = validate_config(_config(tmp_path, **changes))
    assert any(e.startswith(field) for e in errors), errors


def test_missing_gazetteer_exit_1(tmp_path, capsys):
    cfg = _config(tmp_path, gazetteer="nope.csv")
    assert run("all", "--config", cfg) == 1
    assert "gazetteer" in capsys.readouterr().err


def test_cli_override_validation(tmp_path, capsys):
    assert run("validate", "--config", PIPE / "config.yaml", "--threshold", "1.5") == 1
    assert run("validate", "--config", PIPE / "config.yaml", "--apc-min-group", "0") == 1
    assert run("bogus", "--config", PIPE / "config.yaml") == 1


def test_dedup_before_ingest_exit_1(tmp_path, capsys):
    assert run("dedup", "--config", PIPE / "config.yaml", "--output-dir", tmp_path / "o") == 1
    assert "ingest" in capsys.readouterr().err


def test_strict_rejects_exit_2(tmp_path):
    assert run("ingest", "--config", PIPE / "config.yaml", "--output-dir", tmp_path / "o", "--strict") == 2


def test_bad_snapshot_exit_2(tmp_path):
    cfg = _config(tmp_path)
    snap = cfg.parent / "oa-snapshot-2023-07-15.jsonl"
    snap.write_text(snap.read_text() + '{"doi": "10.5555/osmon.w00", "locations": [{"host_type": "moon"}]}\n')
    assert run("all", "--config", cfg) == 2


def test_overrides_change_parameters(tmp_path):
    out = tmp_path / "o"
    assert run("all", "--config", PIPE / "config.yaml", "--output-dir", out,
               "--threshold", "0.3", "--funnel-denominator", "and", "--format", "json") == 0
    body = json.loads((out / "report.json").read_text())
    assert body["parameters"]["mentions_threshold"] == 0.3
    assert body["parameters"]["funnel_denominator"] == "and"
    assert not (out / "tables").exists()
    meta = json.loads((out / "metadata.json").read_text())
    assert meta["checksums"]["config"] != load_config(PIPE / "config.yaml").checksum


def test_workers_env(tmp_path, monkeypatch):
    monkeypatch.setenv("OSMON_WORKERS", "1")
    assert run("all", "--config", PIPE / "config.yaml", "--output-dir", tmp_path / "o") == 0
    assert (tmp_path / "o/report.json").read_bytes() == (GOLDEN / "report.json").read_bytes()
