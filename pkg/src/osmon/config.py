"""Declarative pipeline configuration (one YAML file, optionally overridden from the command line)."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional

import yaml

from .apc import DEFAULT_MIN_GROUP
from .dedup import SourcePriority
from .ingest import BUILTIN_ADAPTERS, IngestError, PerimeterRule, SourceAdapter, build_adapter
from .mentions import DEFAULT_THRESHOLD, DenominatorMode
from .oa import SnapshotError, snapshot_date_from_name
from .records import Genre, Source

DEFAULT_GENRES = ("journal-article", "proceedings", "preprint")


class ConfigError(Exception):
    def __init__(self, errors: list[str]):
        super().__init__("; ".join(errors))
        self.errors = errors


@dataclass
class SourceSpec:
    path: Path
    source: str
    adapter: Optional[str] = None
    field_map: dict[str, Any] = field(default_factory=dict)
    genre_map: dict[str, str] = field(default_factory=dict)

    def build(self) -> SourceAdapter:
        return build_adapter(self.source, self.adapter, self.field_map, self.genre_map)


@dataclass
class PipelineConfig:
    base_dir: Path
    output_dir: Path
    sources: list[SourceSpec]
    source_priority: list[str]
    genres: list[str]
    year_min: int
    year_max: int
    countries: Optional[list[str]] = None
    gazetteer: Optional[Path] = None
    taxonomy: Optional[Path] = None
    allow_city_only: bool = False
    apc_table: Optional[Path] = None
    journal_registry: Optional[Path] = None
    apc_min_group: int = DEFAULT_MIN_GROUP
    snapshots: list[Path] = field(default_factory=list)
    mentions: list[Path] = field(default_factory=list)
    mentions_threshold: float = DEFAULT_THRESHOLD
    funnel_denominator: str = DenominatorMode.OR.value
    checksum: str = ""

    @property
    def priority(self) -> SourcePriority:
        return SourcePriority(self.source_priority)

    @property
    def perimeter(self) -> PerimeterRule:
        return PerimeterRule(
            allowed_genres=frozenset(Genre(g) for g in self.genres),
            year_min=self.year_min,
            year_max=self.year_max,
            required_countries=frozenset(self.countries) if self.countries else None,
        )

    def report_parameters(self) -> dict[str, Any]:
        """Config values that shape the KPIs; paths are left out so reports stay relocatable."""
        return {
            "apc_min_group": self.apc_min_group,
            "mentions_threshold": self.mentions_threshold,
            "perimeter": {
                "genres": sorted(self.genres),
                "year_min": self.year_min,
                "year_max": self.year_max,
                "countries": sorted(self.countries) if self.countries else None,
            },
            "source_priority": list(self.source_priority),
            "allow_city_only": self.allow_city_only,
        }


_OVERRIDABLE = {
    "output_dir", "gazetteer", "taxonomy", "apc_min_group", "mentions_threshold", "funnel_denominator",
}


def _errors_for(raw: dict[str, Any], base: Path) -> list[str]:
    """Static checks; every message starts with the offending field."""
    errs: list[str] = []

    def check_file(name: str, value: Any) -> None:
        if value is None:
            return
        if not isinstance(value, str) or not (base / value).is_file():
            errs.append(f"{name}: file not found: {value}")

    sources = raw.get("sources")
    if not isinstance(sources, list) or not sources:
        errs.append("sources: at least one source file is required")
        sources = []
    for i, spec in enumerate(sources):
        where = f"sources[{i}]"
        if not isinstance(spec, dict):
            errs.append(f"{where}: must be a mapping")
            continue
        check_file(f"{where}.path", spec.get("path"))
        try:
            Source(spec.get("source"))
        except ValueError:
            errs.append(f"{where}.source: must be one of {[s.value for s in Source]}")
            continue
        adapter = spec.get("adapter")
        if adapter is not None and adapter not in BUILTIN_ADAPTERS:
            errs.append(f"{where}.adapter: unknown adapter {adapter!r}")
            continue
        try:
            build_adapter(spec["source"], adapter, spec.get("field_map"), spec.get("genre_map"))
        except IngestError as exc:
            errs.append(f"{where}: {exc}")

    try:
        SourcePriority(raw.get("source_priority") or [])
    except ValueError as exc:
        errs.append(f"source_priority: {exc}")

    per = raw.get("perimeter") or {}
    if not isinstance(per, dict):
        errs.append("perimeter: must be a mapping")
        per = {}
    for g in per.get("genres", DEFAULT_GENRES):
        try:
            Genre(g)
        except ValueError:
            errs.append(f"perimeter.genres: unknown genre {g!r}")
    ymin, ymax = per.get("year_min"), per.get("year_max")
    for name, v in (("year_min", ymin), ("year_max", ymax)):
        if not isinstance(v, int) or isinstance(v, bool):
            errs.append(f"perimeter.{name}: integer required")
    if isinstance(ymin, int) and isinstance(ymax, int) and ymin > ymax:
        errs.append("perimeter.year_min: must be <= year_max")
    countries = per.get("countries")
    if countries is not None and (
        not isinstance(countries, list)
        or not all(isinstance(c, str) and len(c) == 2 and c.isalpha() for c in countries)
    ):
        errs.append("perimeter.countries: list of 2-letter ISO codes required")

    for name in ("gazetteer", "taxonomy", "apc_table", "journal_registry"):
        check_file(name, raw.get(name))

    n_min = raw.get("apc_min_group", DEFAULT_MIN_GROUP)
    if not isinstance(n_min, int) or isinstance(n_min, bool) or n_min < 1:
        errs.append(f"apc_min_group: must be an integer >= 1, got {n_min!r}")
    tau = raw.get("mentions_threshold", DEFAULT_THRESHOLD)
    if not isinstance(tau, (int, float)) or isinstance(tau, bool) or not 0 < tau < 1:
        errs.append(f"mentions_threshold: must be in (0, 1), got {tau!r}")
    mode = raw.get("funnel_denominator", DenominatorMode.OR.value)
    if mode not in [m.value for m in DenominatorMode]:
        errs.append(f"funnel_denominator: must be 'or' or 'and', got {mode!r}")

    snaps = raw.get("snapshots") or []
    if not isinstance(snaps, list):
        errs.append("snapshots: list of files required")
        snaps = []
    dates = []
    for i, s in enumerate(snaps):
        check_file(f"snapshots[{i}]", s)
        try:
            dates.append(snapshot_date_from_name(Path(str(s)).name))
        except SnapshotError as exc:
            errs.append(f"snapshots[{i}]: {exc}")
    if any(b <= a for a, b in zip(dates, dates[1:])):
        errs.append("snapshots: dates must be strictly increasing")
    mentions = raw.get("mentions") or []
    if not isinstance(mentions, list):
        errs.append("mentions: list of files required")
        mentions = []
    for i, m in enumerate(mentions):
        check_file(f"mentions[{i}]", m)
    rules = raw.get("affiliation_rules") or {}
    if not isinstance(rules, dict) or not isinstance(rules.get("allow_city_only", False), bool):
        errs.append("affiliation_rules.allow_city_only: boolean required")
    return errs


def load_raw(path: Path) -> dict[str, Any]:
    try:
        raw = yaml.safe_load(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError([f"config: cannot read {path}: {exc}"]) from exc
    except yaml.YAMLError as exc:
        raise ConfigError([f"config: invalid YAML: {exc}"]) from exc
    if not isinstance(raw, dict):
        raise ConfigError(["config: top level must be a mapping"])
    return raw


def validate_config(path: Path | str, overrides: Optional[dict[str, Any]] = None) -> list[str]:
    """All static errors for the config at `path`; an empty list means it is usable."""
    path = Path(path)
    try:
        raw = load_raw(path)
    except ConfigError as exc:
        return exc.errors
    raw.update({k: v for k, v in (overrides or {}).items() if v is not None})
    return _errors_for(raw, path.parent)


def load_config(path: Path | str, overrides: Optional[dict[str, Any]] = None) -> PipelineConfig:
    path = Path(path).resolve()
    raw = load_raw(path)
    overrides = {k: v for k, v in (overrides or {}).items() if v is not None}
    unknown = set(overrides) - _OVERRIDABLE
    if unknown:
        raise ConfigError([f"{k}: cannot be overridden" for k in sorted(unknown)])
    raw.update(overrides)
    base = path.parent
    errs = _errors_for(raw, base)
    if errs:
        raise ConfigError(errs)

    def p(v: Optional[str]) -> Optional[Path]:
        return (base / v).resolve() if v is not None else None

    per = raw.get("perimeter") or {}
    digest = hashlib.sha256(path.read_bytes())
    digest.update(json.dumps(overrides, sort_keys=True, default=str).encode())
    return PipelineConfig(
        base_dir=base,
        output_dir=p(raw.get("output_dir") or "osmon-out"),
        sources=[
            SourceSpec(p(s["path"]), s["source"], s.get("adapter"), s.get("field_map") or {}, s.get("genre_map") or {})
            for s in raw["sources"]
        ],
        source_priority=list(raw["source_priority"]),
        genres=list(per.get("genres", DEFAULT_GENRES)),
        year_min=per["year_min"],
        year_max=per["year_max"],
        countries=[c.upper() for c in per["countries"]] if per.get("countries") else None,
        gazetteer=p(raw.get("gazetteer")),
        taxonomy=p(raw.get("taxonomy")),
        allow_city_only=bool((raw.get("affiliation_rules") or {}).get("allow_city_only", False)),
        apc_table=p(raw.get("apc_table")),
        journal_registry=p(raw.get("journal_registry")),
        apc_min_group=raw.get("apc_min_group", DEFAULT_MIN_GROUP),
        snapshots=[p(s) for s in raw.get("snapshots") or []],
        mentions=[p(m) for m in raw.get("mentions") or []],
        mentions_threshold=float(raw.get("mentions_threshold", DEFAULT_THRESHOLD)),
        funnel_denominator=raw.get("funnel_denominator", DenominatorMode.OR.value),
        checksum=digest.hexdigest(),
    )
