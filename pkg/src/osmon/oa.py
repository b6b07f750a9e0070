"""Open access observations per snapshot: route, best license, publisher business model, history."""

from __future__ import annotations

import csv
import datetime as _dt
import json
import re
from dataclasses import dataclass, field
from enum import Enum
from decimal import Decimal, InvalidOperation
from fractions import Fraction
from pathlib import Path
from typing import Any, Iterable, Optional, Sequence, Union

from .records import normalize_doi, normalize_issn, pid_string


class SnapshotError(ValueError):
    pass


class RegistryError(ValueError):
    pass


class HostType(str, Enum):
    PUBLISHER = "publisher"
    REPOSITORY = "repository"


class Route(str, Enum):
    CLOSED = "closed"
    PUBLISHER = "publisher"
    REPOSITORY = "repository"
    PUBLISHER_REPOSITORY = "publisher_repository"

    @property
    def hosts(self) -> frozenset[HostType]:
        return _ROUTE_HOSTS[self]


_ROUTE_HOSTS = {
    Route.CLOSED: frozenset(),
    Route.PUBLISHER: frozenset({HostType.PUBLISHER}),
    Route.REPOSITORY: frozenset({HostType.REPOSITORY}),
    Route.PUBLISHER_REPOSITORY: frozenset({HostType.PUBLISHER, HostType.REPOSITORY}),
}


class BusinessModel(str, Enum):
    DIAMOND = "diamond"
    GOLD = "gold"
    HYBRID = "hybrid"
    # publisher-hosted, no license; usually called "bronze"
    PUBLISHER_FREE_TO_READ = "publisher_free_to_read"


# most permissive first
LICENSE_ORDER = (
    "cc0",
    "cc-by",
    "cc-by-sa",
    "cc-by-nd",
    "cc-by-nc",
    "cc-by-nc-sa",
    "cc-by-nc-nd",
    "publisher-specific",
)
_LICENSE_RANK = {lic: i for i, lic in enumerate(LICENSE_ORDER)}
_CC_URL = re.compile(r"creativecommons\.org/(licenses|publicdomain)/([a-z-]+)")


def normalize_license(raw: Optional[str]) -> Optional[str]:
    """Map a vendor license string or URL onto the fixed vocabulary; None means no license."""
    if raw is None:
        return None
    s = str(raw).strip().lower()
    if not s or s in ("none", "null", "unknown", "no license", "n/a", "implied-oa"):
        return None
    m = _CC_URL.search(s)
    if m:
        kind, code = m.groups()
        if kind == "publicdomain":
            return "cc0"
        s = "cc-" + code
    s = s.replace("_", "-").replace(" ", "-")
    if s in ("cc0", "cc-0", "cc-zero", "public-domain", "pd", "cc-pd"):
        return "cc0"
    if s.startswith("cc-"):
        s = re.sub(r"(-\d+(\.\d+)*)+$", "", s)  # version suffix, e.g. cc-by-4.0
    if s.startswith("cc-") and s in _LICENSE_RANK:
        return s
    if s.startswith("cc") and "cc-" + s[2:].lstrip("-") in _LICENSE_RANK:
        return "cc-" + s[2:].lstrip("-")
    return "publisher-specific"


def best_license(licenses: Iterable[Optional[str]]) -> Optional[str]:
    found = [lic for lic in licenses if lic is not None]
    return min(found, key=lambda lic: _LICENSE_RANK[lic]) if found else None


@dataclass(frozen=True)
class OALocation:
    host_type: HostType
    license: Optional[str] = None
    url: Optional[str] = None
    repository_name: Optional[str] = None

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "OALocation":
        try:
            host = HostType(d["host_type"])
        except (KeyError, ValueError) as exc:
            raise SnapshotError(f"location host_type must be publisher or repository, got {d.get('host_type')!r}") from exc
        return cls(host, normalize_license(d.get("license")), d.get("url"), d.get("repository_name"))


@dataclass
class Snapshot:
    date: _dt.date
    entries: dict[str, list[OALocation]] = field(default_factory=dict)

    @classmethod
    def load(cls, path: Union[str, Path]) -> "Snapshot":
        path = Path(path)
        date = snapshot_date_from_name(path.name)
        snap = cls(date)
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                if not line.strip():
                    continue
                try:
                    obj = json.loads(line)
                    key = snapshot_key(obj)
                    locations = [OALocation.from_dict(loc) for loc in obj.get("locations") or []]
                except (json.JSONDecodeError, SnapshotError, AttributeError) as exc:
                    raise SnapshotError(f"{path.name} line {lineno}: {exc}") from exc
                if key in snap.entries:
                    raise SnapshotError(f"{path.name} line {lineno}: {key} appears twice")
                snap.entries[key] = locations
        return snap


_SNAPSHOT_NAME = re.compile(r"^oa-snapshot-(\d{4}-\d{2}-\d{2})\.jsonl$")


def snapshot_date_from_name(name: str) -> _dt.date:
    m = _SNAPSHOT_NAME.match(name)
    if not m:
        raise SnapshotError(f"snapshot file name {name!r} must look like oa-snapshot-YYYY-MM-DD.jsonl")
    try:
        return _dt.date.fromisoformat(m.group(1))
    except ValueError as exc:
        raise SnapshotError(f"snapshot file name {name!r}: {exc}") from exc


def snapshot_key(obj: dict[str, Any]) -> str:
    """DOIs are keyed bare; other PIDs as `scheme:value` under `pid`."""
    if obj.get("doi"):
        doi = normalize_doi(obj["doi"])
        if doi is None:
            raise SnapshotError(f"unparseable doi {obj['doi']!r}")
        return doi
    pid = obj.get("pid")
    if isinstance(pid, str) and ":" in pid:
        scheme, value = pid.split(":", 1)
        return f"{scheme.strip().lower()}:{value.strip()}"
    raise SnapshotError("entry needs a doi or a scheme-prefixed pid")


def load_snapshots(paths: Sequence[Union[str, Path]]) -> list[Snapshot]:
    snaps = [Snapshot.load(p) for p in paths]
    for prev, cur in zip(snaps, snaps[1:]):
        if cur.date <= prev.date:
            raise SnapshotError(f"snapshot dates must strictly increase: {prev.date} then {cur.date}")
    return snaps


@dataclass(frozen=True)
class RegistryEntry:
    is_open_journal: bool
    apc_amount: Optional[Decimal] = None
    apc_currency: Optional[str] = None


@dataclass
class JournalRegistry:
    journals: dict[str, RegistryEntry] = field(default_factory=dict)

    def lookup(self, issns: Iterable[str]) -> Optional[RegistryEntry]:
        for issn in issns:
            entry = self.journals.get(issn)
            if entry is not None:
                return entry
        return None

    @classmethod
    def load(cls, path: Union[str, Path]) -> "JournalRegistry":
        reg = cls()
        with open(path, encoding="utf-8", newline="") as fh:
            for n, row in enumerate(csv.DictReader(fh), start=2):
                issn = normalize_issn(row.get("issn"))
                if issn is None:
                    raise RegistryError(f"{Path(path).name} row {n}: invalid ISSN {row.get('issn')!r}")
                flag = (row.get("is_open_journal") or "").strip().lower()
                if flag not in ("true", "false", "1", "0", "yes", "no"):
                    raise RegistryError(f"{Path(path).name} row {n}: is_open_journal must be true/false")
                amount_raw = (row.get("apc_amount") or "").strip()
                amount = currency = None
                if amount_raw:
                    try:
                        amount = Decimal(amount_raw)
                    except InvalidOperation as exc:
                        raise RegistryError(f"{Path(path).name} row {n}: bad apc_amount {amount_raw!r}") from exc
                    if amount < 0:
                        raise RegistryError(f"{Path(path).name} row {n}: negative apc_amount")
                    currency = (row.get("apc_currency") or "").strip().upper() or None
                    if currency is None or len(currency) != 3:
                        raise RegistryError(f"{Path(path).name} row {n}: apc_currency must be an ISO 4217 code")
                reg.journals[issn] = RegistryEntry(flag in ("true", "1", "yes"), amount, currency)
        return reg


@dataclass(frozen=True)
class OAObservation:
    pid: str
    snapshot_date: _dt.date
    route: Route
    license: Optional[str] = None
    business_model: Optional[BusinessModel] = None
    unknown_in_snapshot: bool = False

    @property
    def is_open(self) -> bool:
        return self.route is not Route.CLOSED

    def to_dict(self) -> dict[str, Any]:
        return {
            "pid": self.pid,
            "snapshot_date": self.snapshot_date.isoformat(),
            "route": self.route.value,
            "license": self.license,
            "business_model": self.business_model.value if self.business_model else None,
            "unknown_in_snapshot": self.unknown_in_snapshot,
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "OAObservation":
        bm = d.get("business_model")
        return cls(
            pid=d["pid"],
            snapshot_date=_dt.date.fromisoformat(d["snapshot_date"]),
            route=Route(d["route"]),
            license=d.get("license"),
            business_model=BusinessModel(bm) if bm else None,
            unknown_in_snapshot=bool(d.get("unknown_in_snapshot")),
        )


def route_of(locations: Iterable[OALocation]) -> Route:
    hosts = {loc.host_type for loc in locations}
    if hosts == {HostType.PUBLISHER, HostType.REPOSITORY}:
        return Route.PUBLISHER_REPOSITORY
    if hosts == {HostType.PUBLISHER}:
        return Route.PUBLISHER
    if hosts == {HostType.REPOSITORY}:
        return Route.REPOSITORY
    return Route.CLOSED


def business_model_for(entry: Optional[RegistryEntry], license: Optional[str]) -> BusinessModel:
    """Decision table. An unknown journal counts as not open; an open journal with an
    unknown APC counts as gold."""
    if entry is not None and entry.is_open_journal:
        if entry.apc_amount is not None and entry.apc_amount == 0:
            return BusinessModel.DIAMOND
        return BusinessModel.GOLD
    if license is not None:
        return BusinessModel.HYBRID
    return BusinessModel.PUBLISHER_FREE_TO_READ


def _lookup_keys(pub) -> list[str]:
    keys = []
    if pub.doi:
        keys.append(pub.doi)
    for scheme, value in pub.alternate_pids:
        keys.append(normalize_doi(value) if scheme == "doi" else f"{scheme.lower()}:{value}")
    return [k for k in keys if k]


def observe_oa(pub, snapshot: Snapshot, registry: Optional[JournalRegistry] = None) -> OAObservation:
    pid = pid_string(pub.canonical_pid)
    locations = None
    for key in _lookup_keys(pub):
        if key in snapshot.entries:
            locations = snapshot.entries[key]
            break
    if locations is None:
        return OAObservation(pid, snapshot.date, Route.CLOSED, unknown_in_snapshot=True)
    route = route_of(locations)
    lic = best_license(loc.license for loc in locations if loc.host_type is HostType.PUBLISHER)
    obs = OAObservation(pid, snapshot.date, route, lic)
    if HostType.PUBLISHER in route.hosts:
        obs = classify_business_model(obs, pub, registry or JournalRegistry())
    return obs


def classify_business_model(obs: OAObservation, pub, registry: JournalRegistry) -> OAObservation:
    if HostType.PUBLISHER not in obs.route.hosts:
        raise ValueError(f"{obs.pid}: business model only applies to publisher-hosted OA")
    entry = registry.lookup(pub.journal_issns)
    return OAObservation(
        obs.pid, obs.snapshot_date, obs.route, obs.license,
        business_model_for(entry, obs.license), obs.unknown_in_snapshot,
    )


def historize(pub, snapshots: Sequence[Snapshot], registry: Optional[JournalRegistry] = None) -> list[OAObservation]:
    """One observation per snapshot, in snapshot order, no interpolation."""
    for prev, cur in zip(snapshots, snapshots[1:]):
        if cur.date <= prev.date:
            raise SnapshotError("snapshots must be in strictly increasing date order")
    return [observe_oa(pub, snap, registry) for snap in snapshots]


@dataclass(frozen=True)
class Rate:
    numerator: int
    denominator: int

    @property
    def value(self) -> Optional[Fraction]:
        return Fraction(self.numerator, self.denominator) if self.denominator else None


def oa_rate(
    observations: Iterable[OAObservation],
    pubs: dict[str, Any],
    year: Optional[int] = None,
    discipline: Optional[str] = None,
    hosts: Optional[Iterable[Union[str, HostType]]] = None,
) -> Rate:
    """Share of matching publications that are open.

    `pubs` maps pid -> publication (for the year/discipline filters). With `hosts`, only routes
    that include one of those host types count as open, e.g. {"repository"} counts repository
    and publisher_repository.
    """
    wanted = {HostType(h) for h in hosts} if hosts is not None else None
    num = den = 0
    for obs in observations:
        pub = pubs[obs.pid]
        if year is not None and pub.year != year:
            continue
        if discipline is not None and pub.discipline != discipline:
            continue
        den += 1
        if wanted is None:
            num += obs.is_open
        else:
            num += bool(obs.route.hosts & wanted)
    return Rate(num, den)
