"""Raw affiliation string -> ISO 3166-1 alpha-2 country codes, by gazetteer evidence."""

from __future__ import annotations

import csv
import hashlib
from collections import defaultdict
from dataclasses import dataclass, field, replace
from enum import Enum
from importlib import resources
from pathlib import Path
from typing import Iterable, Optional, Union

from .records import normalize_text


class GazetteerError(ValueError):
    pass


class EvidenceKind(str, Enum):
    COUNTRY_NAME = "country_name"
    CITY = "city"
    INSTITUTION = "institution"


@dataclass(frozen=True, order=True)
class CountryEvidence:
    country: str
    kind: EvidenceKind
    matched_span: str


@dataclass(frozen=True)
class MatchRules:
    """Evidence combination. The default assigns a country on a country name, or on a city and an
    institution that agree. `allow_city_only` additionally accepts a lone unambiguous city when the
    string carries no country name at all."""

    allow_city_only: bool = False
    city_only_min_weight: float = 1.0


@dataclass
class Gazetteer:
    country_names: dict[str, str] = field(default_factory=dict)
    cities: dict[str, dict[str, float]] = field(default_factory=dict)
    institutions: dict[str, str] = field(default_factory=dict)
    exclusions: list[tuple[str, str]] = field(default_factory=list)
    checksum: Optional[str] = None

    def __post_init__(self) -> None:
        self._index: Optional[dict[str, list[tuple[str, ...]]]] = None

    @classmethod
    def from_rows(cls, rows: Iterable[dict[str, str]], checksum: Optional[str] = None) -> "Gazetteer":
        gaz = cls(checksum=checksum)
        for n, row in enumerate(rows, start=2):
            kind = (row.get("kind") or "").strip().lower()
            alias = normalize_text(row.get("alias"))
            country = (row.get("country") or "").strip().upper()
            if not alias or len(country) != 2 or not country.isalpha():
                raise GazetteerError(f"row {n}: need a non-empty alias and a 2-letter country code")
            raw_weight = (row.get("weight") or "").strip()
            try:
                weight = float(raw_weight) if raw_weight else 1.0
            except ValueError as exc:
                raise GazetteerError(f"row {n}: weight {raw_weight!r} is not a number") from exc
            if kind == "country":
                prev = gaz.country_names.get(alias)
                if prev is not None and prev != country:
                    raise GazetteerError(f"row {n}: country alias {alias!r} maps to both {prev} and {country}")
                gaz.country_names[alias] = country
            elif kind == "city":
                if not 0 < weight <= 1:
                    raise GazetteerError(f"row {n}: city weight must be in (0, 1]")
                gaz.cities.setdefault(alias, {})[country] = weight
            elif kind == "institution":
                prev = gaz.institutions.get(alias)
                if prev is not None and prev != country:
                    raise GazetteerError(f"row {n}: institution {alias!r} maps to both {prev} and {country}")
                gaz.institutions[alias] = country
            elif kind == "exclusion":
                gaz.exclusions.append((alias, country))
            else:
                raise GazetteerError(f"row {n}: unknown kind {kind!r}")
        for city, countries in gaz.cities.items():
            if len(countries) > 1 and any(w >= 1 for w in countries.values()):
                raise GazetteerError(f"ambiguous city {city!r} needs weights < 1 for every country")
        gaz.exclusions = sorted(set(gaz.exclusions))
        return gaz

    @classmethod
    def load(cls, path: Union[str, Path]) -> "Gazetteer":
        data = Path(path).read_bytes()
        text = data.decode("utf-8")
        return cls.from_rows(csv.DictReader(text.splitlines()), checksum=hashlib.sha256(data).hexdigest())

    @classmethod
    def default(cls) -> "Gazetteer":
        with resources.as_file(resources.files("osmon") / "data" / "gazetteer.csv") as p:
            return cls.load(p)

    def alias_index(self) -> dict[str, list[tuple[str, ...]]]:
        if self._index is None:
            aliases = set(self.country_names) | set(self.cities) | set(self.institutions)
            index: dict[str, list[tuple[str, ...]]] = defaultdict(list)
            for alias in aliases:
                toks = tuple(alias.split())
                index[toks[0]].append(toks)
            self._index = {k: sorted(v, key=lambda t: (-len(t), t)) for k, v in index.items()}
        return self._index


def _find(tokens: list[str], pattern: tuple[str, ...]) -> bool:
    n = len(pattern)
    return any(tuple(tokens[i:i + n]) == pattern for i in range(len(tokens) - n + 1))


def find_evidence(raw_affiliation: str, gaz: Gazetteer) -> list[CountryEvidence]:
    """Gazetteer hits at token boundaries, longest alias first, no overlapping spans."""
    tokens = normalize_text(raw_affiliation).split()
    index = gaz.alias_index()
    spans: list[tuple[int, int, tuple[str, ...]]] = []
    for start, tok in enumerate(tokens):
        for alias in index.get(tok, ()):
            end = start + len(alias)
            if tuple(tokens[start:end]) == alias:
                spans.append((start, end, alias))
    spans.sort(key=lambda s: (s[0] - s[1], s[0]))
    consumed = [False] * len(tokens)
    evidence: set[CountryEvidence] = set()
    for start, end, alias in spans:
        if any(consumed[start:end]):
            continue
        for i in range(start, end):
            consumed[i] = True
        text = " ".join(alias)
        if text in gaz.country_names:
            evidence.add(CountryEvidence(gaz.country_names[text], EvidenceKind.COUNTRY_NAME, text))
        for country in gaz.cities.get(text, {}):
            evidence.add(CountryEvidence(country, EvidenceKind.CITY, text))
        if text in gaz.institutions:
            evidence.add(CountryEvidence(gaz.institutions[text], EvidenceKind.INSTITUTION, text))
    return sorted(evidence)


def match_country(
    raw_affiliation: str, gaz: Gazetteer, rules: MatchRules = MatchRules()
) -> tuple[set[str], list[CountryEvidence]]:
    evidence = find_evidence(raw_affiliation, gaz)
    by_kind: dict[EvidenceKind, set[str]] = defaultdict(set)
    for ev in evidence:
        by_kind[ev.kind].add(ev.country)
    named = by_kind[EvidenceKind.COUNTRY_NAME]
    countries = named | (by_kind[EvidenceKind.CITY] & by_kind[EvidenceKind.INSTITUTION])
    if rules.allow_city_only and not named:
        for ev in evidence:
            if ev.kind is EvidenceKind.CITY and gaz.cities[ev.matched_span][ev.country] >= rules.city_only_min_weight:
                countries.add(ev.country)
    if gaz.exclusions and countries:
        tokens = normalize_text(raw_affiliation).split()
        for pattern, vetoed in gaz.exclusions:
            if vetoed in countries and _find(tokens, tuple(pattern.split())):
                countries.discard(vetoed)
    return countries, evidence


def assign_countries(pub, gaz: Gazetteer, rules: MatchRules = MatchRules()):
    """Copy of `pub` whose countries are the sorted union over its raw affiliations."""
    found: set[str] = set()
    for aff in pub.raw_affiliations:
        found |= match_country(aff, gaz, rules)[0]
    return replace(pub, countries=sorted(found))


def filter_by_country(corpus: Iterable, required: Iterable[str]) -> tuple[list, list]:
    required = {c.upper() for c in required}
    kept, excluded = [], []
    for pub in corpus:
        (kept if required.intersection(pub.countries) else excluded).append(pub)
    return kept, excluded
