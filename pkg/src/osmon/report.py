"""KPI tables joined from every enrichment, with canonical JSON/CSV serialization.

Every ratio cell travels with its numerator and denominator. Ratios are written with four
decimals (half-even), amounts with two. Timestamps and checksums go to metadata.json so the
report body is a pure function of the inputs and parameters.
"""

from __future__ import annotations

import datetime as _dt
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from decimal import ROUND_HALF_EVEN, Decimal
from fractions import Fraction
from pathlib import Path
from typing import Any, Iterable, Optional, Sequence, Union

from . import __version__
from .apc import APCEstimate, apc_aggregate
from .disciplines import UNCLASSIFIED
from .jsonio import write_csv, write_json
from .mentions import DenominatorMode, DocumentMentionIndicators, ObjectKind, funnel_kpi
from .oa import BusinessModel, HostType, OAObservation, Route

FORMAT_VERSION = 1
ALL = "all"
UNKNOWN = "unknown"


def format_ratio(num: int, den: int) -> Optional[str]:
    """`num/den` rounded half-even to 4 places; None when the denominator is 0."""
    if den == 0:
        return None
    scaled = round(Fraction(num, den) * 10000)  # Fraction rounding is exact half-even
    return f"{Decimal(scaled).scaleb(-4):.4f}"


def format_amount(value: Optional[Decimal]) -> Optional[str]:
    if value is None:
        return None
    return str(Decimal(value).quantize(Decimal("0.01"), rounding=ROUND_HALF_EVEN))


@dataclass
class Table:
    columns: list[str]
    rows: list[list[Any]] = field(default_factory=list)

    def to_dict(self) -> dict[str, Any]:
        return {"columns": list(self.columns), "rows": [list(r) for r in self.rows]}


@dataclass
class KPIReport:
    tables: dict[str, Table]
    parameters: dict[str, Any]
    snapshots: list[str]
    generated_at: Optional[str] = None
    checksums: dict[str, str] = field(default_factory=dict)

    def body(self) -> dict[str, Any]:
        return {
            "format_version": FORMAT_VERSION,
            "parameters": self.parameters,
            "snapshots": self.snapshots,
            "tables": {name: t.to_dict() for name, t in sorted(self.tables.items())},
        }

    def metadata(self) -> dict[str, Any]:
        return {
            "generated_at": self.generated_at,
            "checksums": dict(sorted(self.checksums.items())),
            "osmon_version": __version__,
        }


class ReportInputError(Exception):
    def __init__(self, stage: str, detail: str):
        super().__init__(f"missing output of stage {stage!r}: {detail}")
        self.stage = stage


def _year_label(year: Optional[int]) -> str:
    return UNKNOWN if year is None else str(year)


def _discipline_label(d: Optional[str]) -> str:
    return d or UNCLASSIFIED


def _label_key(label: str) -> tuple[int, str]:
    # "all" rollups first, concrete values in order, "unknown"/"unclassified" last
    if label == ALL:
        return (0, "")
    if label in (UNKNOWN, UNCLASSIFIED):
        return (2, label)
    return (1, label)


def _slices(pub) -> list[tuple[str, str]]:
    y, d = _year_label(pub.year), _discipline_label(pub.discipline)
    return [(ALL, ALL), (y, ALL), (ALL, d), (y, d)]


def _sorted_slices(keys: Iterable[tuple[str, str]]) -> list[tuple[str, str]]:
    return sorted(set(keys), key=lambda k: (_label_key(k[0]), _label_key(k[1])))


def build_report(
    corpus: Sequence,
    observations: Sequence[OAObservation],
    estimates: Sequence[APCEstimate],
    indicators: Sequence[DocumentMentionIndicators],
    stage_counts: Optional[dict[str, int]] = None,
    funnel_mode: Union[str, DenominatorMode] = DenominatorMode.OR,
    parameters: Optional[dict[str, Any]] = None,
) -> KPIReport:
    pubs = {p.pid: p for p in corpus}
    if len(pubs) != len(corpus):
        raise ValueError("corpus contains duplicate pids")
    for obs in observations:
        if obs.pid not in pubs:
            raise ReportInputError("oa", f"observation for {obs.pid} which is not in the corpus")
    by_snapshot: dict[str, dict[str, OAObservation]] = defaultdict(dict)
    for obs in observations:
        day = obs.snapshot_date.isoformat()
        if obs.pid in by_snapshot[day]:
            raise ValueError(f"two observations for {obs.pid} at {day}")
        by_snapshot[day][obs.pid] = obs
    snapshots = sorted(by_snapshot)
    for day in snapshots:
        missing = len(pubs) - len(by_snapshot[day])
        if missing:
            raise ReportInputError("oa", f"{missing} publications lack an observation at {day}")

    tables: dict[str, Table] = {}
    tables["corpus_size"] = Table(["stage", "count"], [[k, v] for k, v in (stage_counts or {}).items()])
    tables["disciplines"] = _discipline_table(corpus)
    tables["countries"] = _country_table(corpus)
    tables["oa_routes"], tables["oa_rate"] = _oa_tables(corpus, by_snapshot, snapshots)
    tables["oa_business_models"] = _business_model_table(corpus, by_snapshot, snapshots)
    scope = _apc_scope(pubs, by_snapshot, snapshots)
    tables["apc"] = _apc_table(pubs, [e for e in estimates if e.pid in scope])
    tables["mentions_funnel"] = _funnel_table(indicators, DenominatorMode(funnel_mode))

    params = dict(parameters or {})
    params["funnel_denominator"] = DenominatorMode(funnel_mode).value
    params["apc_scope"] = "publisher_open_at_last_snapshot" if snapshots else "all_publications"
    return KPIReport(tables=tables, parameters=params, snapshots=snapshots)


def _discipline_table(corpus) -> Table:
    counts = Counter(_discipline_label(p.discipline) for p in corpus)
    total = len(corpus)
    rows = [[d, n, total, format_ratio(n, total)] for d, n in sorted(counts.items(), key=lambda kv: _label_key(kv[0]))]
    return Table(["discipline", "count", "total", "ratio"], rows)


def _country_table(corpus) -> Table:
    counts = Counter(c for p in corpus for c in p.countries)
    total = len(corpus)
    return Table(
        ["country", "count", "total", "ratio"],
        [[c, n, total, format_ratio(n, total)] for c, n in sorted(counts.items())],
    )


def _oa_tables(corpus, by_snapshot, snapshots) -> tuple[Table, Table]:
    route_rows, rate_rows = [], []
    slices = _sorted_slices(s for p in corpus for s in _slices(p))
    for day in snapshots:
        obs = by_snapshot[day]
        route_counts: dict[tuple[str, str], Counter] = defaultdict(Counter)
        for pub in corpus:
            route = obs[pub.pid].route
            for s in _slices(pub):
                route_counts[s][route] += 1
        for s in slices:
            counts = route_counts[s]
            total = sum(counts.values())
            for route in Route:
                n = counts[route]
                route_rows.append([day, s[0], s[1], route.value, n, total, format_ratio(n, total)])
            n_open = total - counts[Route.CLOSED]
            rate_rows.append([day, s[0], s[1], n_open, total, format_ratio(n_open, total)])
    return (
        Table(["snapshot", "year", "discipline", "route", "count", "total", "ratio"], route_rows),
        Table(["snapshot", "year", "discipline", "open", "total", "rate"], rate_rows),
    )


def _business_model_table(corpus, by_snapshot, snapshots) -> Table:
    rows = []
    years = sorted({_year_label(p.year) for p in corpus} | {ALL}, key=_label_key) if corpus else [ALL]
    for day in snapshots:
        counts: dict[str, Counter] = defaultdict(Counter)
        for pub in corpus:
            bm = by_snapshot[day][pub.pid].business_model
            if bm is None:
                continue
            for y in (ALL, _year_label(pub.year)):
                counts[y][bm] += 1
        for y in years:
            total = sum(counts[y].values())
            for bm in BusinessModel:
                n = counts[y][bm]
                rows.append([day, y, bm.value, n, total, format_ratio(n, total)])
    return Table(["snapshot", "year", "business_model", "count", "total", "ratio"], rows)


def _apc_scope(pubs, by_snapshot, snapshots) -> set[str]:
    if not snapshots:
        return set(pubs)
    last = by_snapshot[snapshots[-1]]
    return {pid for pid, obs in last.items() if HostType.PUBLISHER in obs.route.hosts}


def _apc_table(pubs, estimates: list[APCEstimate]) -> Table:
    # an estimate contributes to each of its four slices
    groups: dict[tuple[str, str], list[APCEstimate]] = defaultdict(list)
    for e in estimates:
        for s in _slices(pubs[e.pid]):
            groups[s].append(e)
    rows = []
    for s in _sorted_slices(groups):
        agg = apc_aggregate(groups[s])[()]
        group_total = len(groups[s])
        for currency in sorted(agg.by_currency):
            cs = agg.by_currency[currency]
            rows.append([
                s[0], s[1], currency, cs.count, group_total, format_ratio(cs.count, group_total),
                format_amount(cs.total), format_amount(cs.mean),
            ])
        if agg.count_unknown:
            rows.append([
                s[0], s[1], UNKNOWN, agg.count_unknown, group_total,
                format_ratio(agg.count_unknown, group_total), None, None,
            ])
    return Table(
        ["year", "discipline", "currency", "count", "group_total", "share", "total_amount", "mean_amount"], rows
    )


def _funnel_table(indicators: Sequence[DocumentMentionIndicators], mode: DenominatorMode) -> Table:
    rows = []
    for kind in ObjectKind:
        flags = [ind.of(kind) for ind in indicators]
        kpi = funnel_kpi(indicators, kind, mode)
        rows.append([
            kind.value,
            mode.value,
            len(indicators),
            sum(f.mention_count > 0 for f in flags),
            sum(f.uses for f in flags),
            sum(f.creates for f in flags),
            sum(f.shares for f in flags),
            kpi.numerator,
            kpi.denominator,
            format_ratio(kpi.numerator, kpi.denominator),
        ])
    return Table(
        ["object_kind", "mode", "documents", "with_mentions", "uses", "creates", "shares",
         "numerator", "denominator", "rate"],
        rows,
    )


def emit_report(report: KPIReport, out_dir: Union[str, Path], formats: Iterable[str] = ("json", "csv")) -> list[Path]:
    """Write report.json, tables/<name>.csv and metadata.json under `out_dir`."""
    out_dir = Path(out_dir)
    formats = set(formats)
    unknown = formats - {"json", "csv"}
    if unknown:
        raise ValueError(f"unknown report formats {sorted(unknown)}")
    written = []
    if "json" in formats:
        write_json(out_dir / "report.json", report.body())
        written.append(out_dir / "report.json")
    if "csv" in formats:
        for name, table in sorted(report.tables.items()):
            path = out_dir / "tables" / f"{name}.csv"
            write_csv(path, table.columns, table.rows)
            written.append(path)
    meta = report.metadata()
    if meta["generated_at"] is None:
        meta["generated_at"] = _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")
    write_json(out_dir / "metadata.json", meta)
    written.append(out_dir / "metadata.json")
    return written
