"""Article-level APC estimates from paid-APC records and journal registry list prices."""

from __future__ import annotations

import csv
from collections import defaultdict
from dataclasses import dataclass, field
from decimal import Decimal, InvalidOperation
from enum import Enum
from pathlib import Path
from typing import Any, Callable, Hashable, Iterable, Optional, Union

from .oa import JournalRegistry
from .records import normalize_doi, normalize_issn

DEFAULT_MIN_GROUP = 5
APC_MIXED_CURRENCY = "APC_MIXED_CURRENCY"


class APCTableError(ValueError):
    pass


class Method(str, Enum):
    DIRECT = "direct"
    JOURNAL_YEAR_AVERAGE = "journal_year_average"
    REGISTRY_LIST_PRICE = "registry_list_price"
    DIAMOND_ZERO = "diamond_zero"
    UNKNOWN = "unknown"


@dataclass(frozen=True)
class APCRow:
    doi: Optional[str]
    issn: Optional[str]
    year: Optional[int]
    amount: Decimal
    currency: str


@dataclass
class APCTable:
    rows: list[APCRow] = field(default_factory=list)

    def __post_init__(self) -> None:
        self.by_doi: dict[str, APCRow] = {}
        self.by_issn_year: dict[tuple[str, int], list[APCRow]] = defaultdict(list)
        for row in self.rows:
            if row.amount < 0:
                raise APCTableError(f"negative amount {row.amount}")
            if len(row.currency) != 3 or not row.currency.isalpha() or not row.currency.isupper():
                raise APCTableError(f"currency {row.currency!r} is not an ISO 4217 code")
            if row.doi:
                if row.doi in self.by_doi:
                    raise APCTableError(f"doi {row.doi} listed twice")
                self.by_doi[row.doi] = row
            if row.issn and row.year is not None:
                self.by_issn_year[(row.issn, row.year)].append(row)

    @classmethod
    def load(cls, path: Union[str, Path]) -> "APCTable":
        rows = []
        with open(path, encoding="utf-8", newline="") as fh:
            reader = csv.DictReader(fh)
            missing = {"doi", "issn", "year", "amount", "currency"} - set(reader.fieldnames or [])
            if missing:
                raise APCTableError(f"{Path(path).name}: missing columns {sorted(missing)}")
            for n, r in enumerate(reader, start=2):
                try:
                    amount = Decimal(r["amount"].strip())
                    year = int(r["year"]) if (r["year"] or "").strip() else None
                except (InvalidOperation, ValueError, AttributeError) as exc:
                    raise APCTableError(f"{Path(path).name} row {n}: {exc}") from exc
                rows.append(
                    APCRow(
                        doi=normalize_doi(r["doi"]),
                        issn=normalize_issn(r["issn"]),
                        year=year,
                        amount=amount,
                        currency=(r["currency"] or "").strip().upper(),
                    )
                )
        try:
            return cls(rows)
        except APCTableError as exc:
            raise APCTableError(f"{Path(path).name}: {exc}") from exc


@dataclass(frozen=True)
class APCEstimate:
    pid: str
    method: Method
    amount: Optional[Decimal] = None
    currency: Optional[str] = None
    group_size: Optional[int] = None
    notes: tuple[str, ...] = ()

    def to_dict(self) -> dict[str, Any]:
        return {
            "pid": self.pid,
            "method": self.method.value,
            "amount": None if self.amount is None else str(self.amount),
            "currency": self.currency,
            "group_size": self.group_size,
            "notes": list(self.notes),
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "APCEstimate":
        return cls(
            pid=d["pid"],
            method=Method(d["method"]),
            amount=None if d.get("amount") is None else Decimal(d["amount"]),
            currency=d.get("currency"),
            group_size=d.get("group_size"),
            notes=tuple(d.get("notes") or ()),
        )


def _group_mean(rows: list[APCRow]) -> tuple[Decimal, str]:
    currencies = {r.currency for r in rows}
    if len(currencies) != 1:
        raise APCTableError(APC_MIXED_CURRENCY)
    return sum((r.amount for r in rows), Decimal(0)) / len(rows), currencies.pop()


def estimate_apc(pub, table: APCTable, registry: JournalRegistry, n_min: int = DEFAULT_MIN_GROUP) -> APCEstimate:
    """First matching rule wins: paid record, diamond journal, journal-year mean, list price."""
    if n_min < 1:
        raise ValueError("n_min must be >= 1")
    pid = pub.pid
    if pub.doi and pub.doi in table.by_doi:
        row = table.by_doi[pub.doi]
        return APCEstimate(pid, Method.DIRECT, row.amount, row.currency)

    entry = registry.lookup(pub.journal_issns)
    if entry is not None and entry.is_open_journal and entry.apc_amount is not None and entry.apc_amount == 0:
        return APCEstimate(pid, Method.DIAMOND_ZERO, Decimal(0), entry.apc_currency)

    notes: list[str] = []
    if pub.year is not None:
        for issn in pub.journal_issns:
            rows = table.by_issn_year.get((issn, pub.year), [])
            if len(rows) < n_min:
                continue
            try:
                mean, currency = _group_mean(rows)
            except APCTableError:
                notes.append(f"{APC_MIXED_CURRENCY}:{issn}:{pub.year}")
                continue
            return APCEstimate(pid, Method.JOURNAL_YEAR_AVERAGE, mean, currency, len(rows), tuple(notes))

    if entry is not None and entry.apc_amount is not None:
        return APCEstimate(pid, Method.REGISTRY_LIST_PRICE, entry.apc_amount, entry.apc_currency, notes=tuple(notes))
    return APCEstimate(pid, Method.UNKNOWN, notes=tuple(notes))


@dataclass
class CurrencyStats:
    count: int = 0
    total: Decimal = Decimal(0)

    @property
    def mean(self) -> Decimal:
        return self.total / self.count


@dataclass
class APCGroupStats:
    count_unknown: int = 0
    by_currency: dict[str, CurrencyStats] = field(default_factory=dict)

    @property
    def count_known(self) -> int:
        return sum(s.count for s in self.by_currency.values())

    def mean(self, currency: Optional[str] = None) -> Optional[Decimal]:
        """Mean known amount; None when nothing is known or currencies are mixed without a pick."""
        if currency is None:
            if len(self.by_currency) != 1:
                return None
            currency = next(iter(self.by_currency))
        stats = self.by_currency.get(currency)
        return stats.mean if stats and stats.count else None


def apc_aggregate(
    estimates: Iterable[APCEstimate], group_by: Callable[[APCEstimate], Hashable] = lambda e: ()
) -> dict[Hashable, APCGroupStats]:
    """Per-group totals and means over known amounts; unknowns are counted, never imputed."""
    groups: dict[Hashable, APCGroupStats] = defaultdict(APCGroupStats)
    for est in estimates:
        g = groups[group_by(est)]
        if est.method is Method.UNKNOWN or est.amount is None:
            g.count_unknown += 1
            continue
        stats = g.by_currency.setdefault(est.currency or "", CurrencyStats())
        stats.count += 1
        stats.total += est.amount
    return dict(groups)
