"""Stage orchestration: each stage reads the previous stage's artifacts and writes its own atomically."""

from __future__ import annotations

import json
import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable, Optional

from .affiliations import Gazetteer, MatchRules, assign_countries, filter_by_country
from .apc import APCTable, APCEstimate, estimate_apc
from .config import PipelineConfig
from .dedup import MergedPublication, dedup_corpus
from .disciplines import Taxonomy, classify_corpus
from .ingest import apply_perimeter, read_source_file, rejects_sidecar_name
from .jsonio import file_sha256, read_jsonl, write_json, write_jsonl
from .mentions import DocumentMentionIndicators, corpus_indicators, parse_mentions_file
from .oa import JournalRegistry, OAObservation, historize, load_snapshots
from .records import PublicationRecord
from .report import build_report, emit_report

logger = logging.getLogger(__name__)

STAGES = ("ingest", "dedup", "enrich", "oa", "apc", "mentions", "report")
REQUIRES = {
    "ingest": (),
    "dedup": ("ingest",),
    "enrich": ("dedup",),
    "oa": ("enrich",),
    "apc": ("enrich",),
    "mentions": ("enrich",),
    "report": ("enrich", "oa", "apc", "mentions"),
}


class StageDependencyError(Exception):
    pass


@dataclass
class StageResult:
    stage: str
    rejects: int = 0
    outputs: int = 0


def _artifact_dir(cfg: PipelineConfig, stage: str) -> Path:
    return cfg.output_dir / "artifacts" / stage


def _stats_path(cfg: PipelineConfig, stage: str) -> Path:
    return _artifact_dir(cfg, stage) / "stats.json"


def _require(cfg: PipelineConfig, stage: str) -> None:
    # stats.json is written last, so its presence marks a completed stage
    for dep in REQUIRES[stage]:
        if not _stats_path(cfg, dep).is_file():
            raise StageDependencyError(
                f"stage {stage!r} needs the output of stage {dep!r}; run `osmon {dep}` first"
            )


def _stats(cfg: PipelineConfig, stage: str) -> dict[str, Any]:
    return json.loads(_stats_path(cfg, stage).read_text(encoding="utf-8"))


def _workers() -> int:
    try:
        return max(1, int(os.environ.get("OSMON_WORKERS", "4")))
    except ValueError:
        return 1


def _load_corpus(cfg: PipelineConfig) -> list[MergedPublication]:
    return [MergedPublication.from_dict(d) for d in read_jsonl(_artifact_dir(cfg, "enrich") / "corpus.jsonl")]


def run_ingest(cfg: PipelineConfig) -> StageResult:
    out = _artifact_dir(cfg, "ingest")

    def one(spec):
        return spec, read_source_file(spec.path, spec.build())

    with ThreadPoolExecutor(max_workers=_workers()) as pool:
        results = list(pool.map(one, cfg.sources))  # map keeps config order

    records: list[PublicationRecord] = []
    files, total_rejects = [], 0
    used_names: set[str] = set()
    for i, (spec, (recs, rejects)) in enumerate(results):
        name = rejects_sidecar_name(spec.path)
        if name in used_names:
            name = f"{i}-{name}"
        used_names.add(name)
        write_jsonl(out / "rejects" / name, (r.to_dict() for r in rejects))
        records.extend(recs)
        total_rejects += len(rejects)
        files.append({"file": spec.path.name, "source": spec.source, "records": len(recs),
                      "rejects": len(rejects), "rejects_file": f"rejects/{name}"})
    write_jsonl(out / "records.jsonl", (r.to_dict() for r in records))
    write_json(_stats_path(cfg, "ingest"), {"files": files, "records": len(records), "rejects": total_rejects})
    return StageResult("ingest", total_rejects, len(records))


def run_dedup(cfg: PipelineConfig) -> StageResult:
    _require(cfg, "dedup")
    out = _artifact_dir(cfg, "dedup")
    records = [PublicationRecord.from_dict(d) for d in read_jsonl(_artifact_dir(cfg, "ingest") / "records.jsonl")]
    merged, rejects = dedup_corpus(records, cfg.priority)
    write_jsonl(out / "merged.jsonl", (m.to_dict() for m in merged))
    write_jsonl(out / "rejects.jsonl", (r.to_dict() for r in rejects))
    write_json(_stats_path(cfg, "dedup"), {"records": len(records), "merged": len(merged), "rejects": len(rejects)})
    return StageResult("dedup", len(rejects), len(merged))


def run_enrich(cfg: PipelineConfig) -> StageResult:
    _require(cfg, "enrich")
    out = _artifact_dir(cfg, "enrich")
    gaz = Gazetteer.load(cfg.gazetteer) if cfg.gazetteer else Gazetteer.default()
    tax = Taxonomy.load(cfg.taxonomy) if cfg.taxonomy else Taxonomy.default()
    merged = [MergedPublication.from_dict(d) for d in read_jsonl(_artifact_dir(cfg, "dedup") / "merged.jsonl")]

    rule = cfg.perimeter
    kept, out_of_perimeter = apply_perimeter(merged, rule)
    rules = MatchRules(allow_city_only=cfg.allow_city_only)
    located = [assign_countries(p, gaz, rules) for p in kept]
    if rule.required_countries:
        located, out_of_country = filter_by_country(located, rule.required_countries)
    else:
        out_of_country = []
    corpus, distribution = classify_corpus(located, tax)

    excluded = [{"pid": p.pid, "reason": "perimeter"} for p in out_of_perimeter]
    excluded += [{"pid": p.pid, "reason": "country", "countries": p.countries} for p in out_of_country]
    write_jsonl(out / "corpus.jsonl", (p.to_dict() for p in corpus))
    write_jsonl(out / "excluded.jsonl", sorted(excluded, key=lambda e: e["pid"]))
    write_json(_stats_path(cfg, "enrich"), {
        "merged": len(merged),
        "in_perimeter": len(kept),
        "in_country_perimeter": len(located),
        "corpus": len(corpus),
        "disciplines": distribution,
        "gazetteer_sha256": gaz.checksum,
        "taxonomy_sha256": tax.checksum,
    })
    return StageResult("enrich", 0, len(corpus))


def run_oa(cfg: PipelineConfig) -> StageResult:
    _require(cfg, "oa")
    corpus = _load_corpus(cfg)
    snapshots = load_snapshots(cfg.snapshots)
    registry = JournalRegistry.load(cfg.journal_registry) if cfg.journal_registry else JournalRegistry()
    observations = [obs for pub in corpus for obs in historize(pub, snapshots, registry)]
    observations.sort(key=lambda o: (o.pid, o.snapshot_date))
    out = _artifact_dir(cfg, "oa")
    write_jsonl(out / "observations.jsonl", (o.to_dict() for o in observations))
    write_json(_stats_path(cfg, "oa"), {
        "snapshots": [s.date.isoformat() for s in snapshots],
        "observations": len(observations),
        "unknown_in_snapshot": sum(o.unknown_in_snapshot for o in observations),
    })
    return StageResult("oa", 0, len(observations))


def run_apc(cfg: PipelineConfig) -> StageResult:
    _require(cfg, "apc")
    corpus = _load_corpus(cfg)
    table = APCTable.load(cfg.apc_table) if cfg.apc_table else APCTable()
    registry = JournalRegistry.load(cfg.journal_registry) if cfg.journal_registry else JournalRegistry()
    estimates = [estimate_apc(p, table, registry, cfg.apc_min_group) for p in corpus]
    out = _artifact_dir(cfg, "apc")
    write_jsonl(out / "estimates.jsonl", (e.to_dict() for e in estimates))
    methods: dict[str, int] = {}
    for e in estimates:
        methods[e.method.value] = methods.get(e.method.value, 0) + 1
    write_json(_stats_path(cfg, "apc"), {"estimates": len(estimates), "methods": dict(sorted(methods.items()))})
    return StageResult("apc", 0, len(estimates))


def run_mentions(cfg: PipelineConfig) -> StageResult:
    _require(cfg, "mentions")
    corpus = _load_corpus(cfg)
    out = _artifact_dir(cfg, "mentions")
    mentions, files, total_rejects = [], [], 0
    for i, path in enumerate(cfg.mentions):
        recs, rejects = parse_mentions_file(path)
        name = f"{i}-{rejects_sidecar_name(path)}"
        write_jsonl(out / "rejects" / name, (r.to_dict() for r in rejects))
        mentions.extend(recs)
        total_rejects += len(rejects)
        files.append({"file": path.name, "mentions": len(recs), "rejects": len(rejects)})
    result = corpus_indicators((p.pid for p in corpus), mentions, cfg.mentions_threshold)
    if result.dropped_mentions:
        logger.warning("dropped %d mentions of documents outside the corpus", result.dropped_mentions)
    write_jsonl(out / "indicators.jsonl", (ind.to_dict() for ind in result.indicators))
    write_json(_stats_path(cfg, "mentions"), {
        "files": files,
        "mentions": len(mentions),
        "rejects": total_rejects,
        "dropped_outside_corpus": result.dropped_mentions,
        "documents": len(result.indicators),
    })
    return StageResult("mentions", total_rejects, len(result.indicators))


def run_report(cfg: PipelineConfig, formats=("json", "csv")) -> StageResult:
    _require(cfg, "report")
    corpus = _load_corpus(cfg)
    observations = [OAObservation.from_dict(d) for d in read_jsonl(_artifact_dir(cfg, "oa") / "observations.jsonl")]
    estimates = [APCEstimate.from_dict(d) for d in read_jsonl(_artifact_dir(cfg, "apc") / "estimates.jsonl")]
    indicators = [
        DocumentMentionIndicators.from_dict(d)
        for d in read_jsonl(_artifact_dir(cfg, "mentions") / "indicators.jsonl")
    ]
    ingest, dedup, enrich = _stats(cfg, "ingest"), _stats(cfg, "dedup"), _stats(cfg, "enrich")
    stage_counts = {
        "input_lines": ingest["records"] + ingest["rejects"],
        "ingest_rejects": ingest["rejects"],
        "records": ingest["records"],
        "merged_publications": dedup["merged"],
        "dedup_rejects": dedup["rejects"],
        "in_perimeter": enrich["in_perimeter"],
        "in_country_perimeter": enrich["in_country_perimeter"],
        "corpus": enrich["corpus"],
    }
    report = build_report(
        corpus, observations, estimates, indicators,
        stage_counts=stage_counts,
        funnel_mode=cfg.funnel_denominator,
        parameters=cfg.report_parameters(),
    )
    report.checksums = _input_checksums(cfg, enrich)
    emit_report(report, cfg.output_dir, formats)
    return StageResult("report", 0, len(report.tables))


def _input_checksums(cfg: PipelineConfig, enrich_stats: dict[str, Any]) -> dict[str, str]:
    sums = {"config": cfg.checksum}
    if enrich_stats.get("gazetteer_sha256"):
        sums["gazetteer"] = enrich_stats["gazetteer_sha256"]
    if enrich_stats.get("taxonomy_sha256"):
        sums["taxonomy"] = enrich_stats["taxonomy_sha256"]
    files = {"apc_table": cfg.apc_table, "journal_registry": cfg.journal_registry}
    files.update({f"source:{s.path.name}": s.path for s in cfg.sources})
    files.update({f"snapshot:{p.name}": p for p in cfg.snapshots})
    files.update({f"mentions:{p.name}": p for p in cfg.mentions})
    for key, path in files.items():
        if path is not None:
            sums[key] = file_sha256(path)
    return sums


RUNNERS: dict[str, Callable[[PipelineConfig], StageResult]] = {
    "ingest": run_ingest,
    "dedup": run_dedup,
    "enrich": run_enrich,
    "oa": run_oa,
    "apc": run_apc,
    "mentions": run_mentions,
    "report": run_report,
}


def run_stage(stage: str, cfg: PipelineConfig, formats=("json", "csv")) -> list[StageResult]:
    """Run one stage, or every stage in dependency order for `all`."""
    if stage == "all":
        return [run_stage(s, cfg, formats)[0] for s in STAGES]
    if stage not in RUNNERS:
        raise ValueError(f"unknown stage {stage!r}")
    logger.info("running stage %s", stage)
    if stage == "report":
        return [run_report(cfg, formats)]
    return [RUNNERS[stage](cfg)]
