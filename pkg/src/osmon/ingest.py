"""Mapping of line-delimited source exports onto PublicationRecord, plus perimeter filtering."""

from __future__ import annotations

import json
import logging
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, Iterator, Optional, Union

from .records import (
    Author,
    Genre,
    PublicationRecord,
    Source,
    dedupe_keyed,
    normalize_doi,
    normalize_issn,
    normalize_orcid,
    normalize_text,
    validate_record,
)

logger = logging.getLogger(__name__)

TARGET_FIELDS = (
    "source_id",
    "doi",
    "alternate_pids",
    "title",
    "authors",
    "raw_affiliations",
    "journal_issns",
    "journal_title",
    "publisher",
    "year",
    "genre",
    "related_identifiers",
    "licenses",
    "keywords",
)
PID_PREFIX = "pid:"


class IngestError(Exception):
    """Unreadable input file or unusable adapter definition."""


@dataclass(frozen=True)
class Reject:
    line: int
    reason: str

    def to_dict(self) -> dict[str, Any]:
        return {"line": self.line, "reason": self.reason}


@dataclass
class SourceAdapter:
    """Field paths use dots, integer indices and `*` to flatten lists (e.g. `author.*.affiliation.*.name`).

    A target may list several paths; the first one yielding a value wins. Targets of the form
    `pid:<scheme>` add an alternate PID under that scheme.
    """

    source: Source
    field_map: dict[str, list[str]]
    genre_map: dict[str, Genre] = field(default_factory=dict)

    def __post_init__(self) -> None:
        for target in self.field_map:
            if target not in TARGET_FIELDS and not target.startswith(PID_PREFIX):
                raise IngestError(f"adapter for {self.source.value}: unknown target field {target!r}")
        if "title" not in self.field_map:
            raise IngestError(f"adapter for {self.source.value}: title must be mapped")
        has_pid = "doi" in self.field_map or "alternate_pids" in self.field_map or any(
            t.startswith(PID_PREFIX) for t in self.field_map
        )
        if not has_pid:
            raise IngestError(f"adapter for {self.source.value}: map doi or at least one alternate PID")

    def map_genre(self, raw: Optional[str]) -> Genre:
        if raw is None:
            return Genre.OTHER
        return self.genre_map.get(str(raw).strip().lower(), Genre.OTHER)


@dataclass
class PerimeterRule:
    allowed_genres: frozenset[Genre]
    year_min: int
    year_max: int
    required_countries: Optional[frozenset[str]] = None

    def __post_init__(self) -> None:
        if self.year_min > self.year_max:
            raise ValueError(f"perimeter year_min {self.year_min} > year_max {self.year_max}")

    def admits(self, pub) -> bool:
        return (
            pub.genre in self.allowed_genres
            and pub.year is not None
            and self.year_min <= pub.year <= self.year_max
        )


# --- field path resolution -------------------------------------------------


def resolve_path(obj: Any, path: str) -> list[Any]:
    """All values reached by `path`; lists met at a `*` segment are flattened."""
    current = [obj]
    for seg in path.split("."):
        nxt: list[Any] = []
        for value in current:
            if seg == "*":
                if isinstance(value, list):
                    nxt.extend(value)
            elif isinstance(value, dict):
                if seg in value:
                    nxt.append(value[seg])
            elif isinstance(value, list) and re.fullmatch(r"-?\d+", seg):
                idx = int(seg)
                if -len(value) <= idx < len(value):
                    nxt.append(value[idx])
        current = nxt
    return [v for v in current if v is not None]


def _lookup(obj: dict[str, Any], paths: list[str]) -> list[Any]:
    for path in paths:
        values = resolve_path(obj, path)
        if values:
            return values
    return []


def _flatten(values: Iterable[Any]) -> list[Any]:
    out: list[Any] = []
    for v in values:
        if isinstance(v, list):
            out.extend(_flatten(v))
        else:
            out.append(v)
    return out


def _first_str(values: list[Any]) -> Optional[str]:
    for v in _flatten(values):
        if isinstance(v, (str, int)) and not isinstance(v, bool):
            s = str(v).strip()
            if s:
                return s
    return None


def _strings(values: list[Any], keys: tuple[str, ...] = ("name", "value", "URL", "url")) -> list[str]:
    out = []
    for v in _flatten(values):
        if isinstance(v, dict):
            v = next((v[k] for k in keys if isinstance(v.get(k), str)), None)
        if isinstance(v, str) and v.strip():
            out.append(v.strip())
    return out


def _year(values: list[Any]) -> Optional[int]:
    for v in _flatten(values):
        if isinstance(v, bool):
            continue
        if isinstance(v, int):
            return v
        if isinstance(v, str):
            m = re.match(r"\s*(\d{4})", v)
            if m:
                return int(m.group(1))
    return None


_FAMILY_KEYS = ("family", "familyName", "lastName", "last_name", "lastname", "surname")
_GIVEN_KEYS = ("given", "givenName", "foreName", "firstName", "first_name", "forename")
_ORCID_KEYS = ("orcid", "ORCID")


def _author(value: Any) -> Optional[Author]:
    if isinstance(value, str):
        name = value.strip()
        if not name:
            return None
        if "," in name:
            family, given = (p.strip() for p in name.split(",", 1))
        else:
            parts = name.split()
            family, given = parts[-1], " ".join(parts[:-1])
        return Author(family=family, given=given or None)
    if not isinstance(value, dict):
        return None
    family = next((value[k] for k in _FAMILY_KEYS if isinstance(value.get(k), str) and value[k].strip()), None)
    given = next((value[k] for k in _GIVEN_KEYS if isinstance(value.get(k), str) and value[k].strip()), None)
    if family is None:
        full = value.get("name")
        if isinstance(full, str):
            parsed = _author(full)
            if parsed is None:
                return None
            family, given = parsed.family, given or parsed.given
    if family is None:
        return None
    orcid = next((normalize_orcid(value[k]) for k in _ORCID_KEYS if value.get(k)), None)
    return Author(family=family.strip(), given=given.strip() if given else None, orcid=orcid)


def _relation_name(raw: str) -> str:
    # Crossref kebab-case ("is-preprint-of") and DataCite CamelCase ("IsPreprintOf") unify here
    if "-" in raw or "_" in raw:
        return "".join(part.capitalize() for part in re.split(r"[-_]", raw) if part)
    return raw[:1].upper() + raw[1:]


def _related(values: list[Any]) -> list[tuple[str, str, str]]:
    out: list[tuple[str, str, str]] = []
    for v in values:
        items: list[tuple[Any, Any]] = []
        if isinstance(v, list):
            items = [(None, x) for x in v]
        elif isinstance(v, dict) and not any(k in v for k in ("relationType", "relation")):
            # Crossref style {relation: [{id-type, id}, ...]}
            for rel, targets in v.items():
                for t in targets if isinstance(targets, list) else [targets]:
                    items.append((rel, t))
        else:
            items = [(None, v)]
        for rel, t in items:
            if not isinstance(t, dict):
                continue
            relation = rel or t.get("relationType") or t.get("relation")
            scheme = t.get("relatedIdentifierType") or t.get("scheme") or t.get("id-type")
            value = t.get("relatedIdentifier") or t.get("value") or t.get("id")
            if not (isinstance(relation, str) and isinstance(scheme, str) and isinstance(value, str)):
                continue
            scheme = scheme.strip().lower()
            if scheme == "doi":
                value = normalize_doi(value)
                if value is None:
                    continue
            out.append((_relation_name(relation.strip()), scheme, value.strip()))
    return dedupe_keyed(out, key=lambda r: r)


def _alternate_pids(values: list[Any]) -> list[tuple[str, str]]:
    out = []
    for v in _flatten(values):
        if isinstance(v, dict):
            scheme, value = v.get("scheme") or v.get("type"), v.get("value") or v.get("id")
        elif isinstance(v, str) and ":" in v:
            scheme, value = v.split(":", 1)
        else:
            continue
        if isinstance(scheme, str) and isinstance(value, (str, int)) and str(value).strip():
            out.append((scheme.strip().lower(), str(value).strip()))
    return out


def map_object(obj: dict[str, Any], adapter: SourceAdapter) -> PublicationRecord:
    fm = adapter.field_map

    def get(target: str) -> list[Any]:
        return _lookup(obj, fm.get(target, []))

    alt = _alternate_pids(get("alternate_pids"))
    for target, paths in fm.items():
        if target.startswith(PID_PREFIX):
            value = _first_str(_lookup(obj, paths))
            if value:
                alt.append((target[len(PID_PREFIX):].lower(), value))
    authors = [a for a in (_author(v) for v in _flatten(get("authors"))) if a is not None]
    issns = [i for i in (normalize_issn(s) for s in _strings(get("journal_issns"))) if i]
    source_id = _first_str(get("source_id")) or ""
    return PublicationRecord(
        source_id=source_id,
        source=adapter.source,
        doi=normalize_doi(_first_str(get("doi"))),
        alternate_pids=dedupe_keyed(alt, key=lambda p: p),
        title=_first_str(get("title")) or "",
        authors=authors,
        raw_affiliations=dedupe_keyed(_strings(get("raw_affiliations")), key=normalize_text),
        journal_issns=dedupe_keyed(issns, key=lambda i: i),
        journal_title=_first_str(get("journal_title")),
        publisher=_first_str(get("publisher")),
        year=_year(get("year")),
        genre=adapter.map_genre(_first_str(get("genre"))),
        related_identifiers=_related(get("related_identifiers")),
        licenses=dedupe_keyed(_strings(get("licenses")), key=lambda s: s),
        keywords=dedupe_keyed(_strings(get("keywords")), key=normalize_text),
    )


def iter_source_file(
    path: Union[str, Path], adapter: SourceAdapter, current_year: Optional[int] = None
) -> Iterator[Union[PublicationRecord, Reject]]:
    """Yield one record or one reject per line, in file order."""
    try:
        fh = open(path, encoding="utf-8")
    except OSError as exc:
        raise IngestError(f"cannot read {path}: {exc}") from exc
    with fh:
        try:
            for lineno, line in enumerate(fh, start=1):
                yield _parse_line(line, lineno, adapter, current_year)
        except UnicodeDecodeError as exc:
            raise IngestError(f"{path} is not valid UTF-8: {exc}") from exc


def _parse_line(line: str, lineno: int, adapter: SourceAdapter, current_year: Optional[int]):
    if not line.strip():
        return Reject(lineno, "empty line")
    try:
        obj = json.loads(line)
    except json.JSONDecodeError as exc:
        return Reject(lineno, f"malformed JSON: {exc.msg}")
    if not isinstance(obj, dict):
        return Reject(lineno, "line is not a JSON object")
    rec = map_object(obj, adapter)
    violations = validate_record(rec, current_year=current_year)
    if violations:
        return Reject(lineno, "; ".join(str(v) for v in violations))
    return rec


def read_source_file(
    path: Union[str, Path], adapter: SourceAdapter, current_year: Optional[int] = None
) -> tuple[list[PublicationRecord], list[Reject]]:
    records: list[PublicationRecord] = []
    rejects: list[Reject] = []
    for item in iter_source_file(path, adapter, current_year):
        (rejects if isinstance(item, Reject) else records).append(item)
    if rejects:
        logger.info("%s: %d records, %d rejects", path, len(records), len(rejects))
    return records, rejects


def rejects_sidecar_name(path: Union[str, Path]) -> str:
    return f"{Path(path).name}.rejects.jsonl"


def apply_perimeter(records: Iterable, rule: PerimeterRule) -> tuple[list, list]:
    kept, excluded = [], []
    for rec in records:
        (kept if rule.admits(rec) else excluded).append(rec)
    return kept, excluded


# --- built-in adapters -------------------------------------------------------

_CROSSREF_GENRES = {
    "journal-article": Genre.JOURNAL_ARTICLE,
    "proceedings-article": Genre.PROCEEDINGS,
    "posted-content": Genre.PREPRINT,
    "book-chapter": Genre.BOOK_CHAPTER,
    "dissertation": Genre.THESIS,
}
_PUBMED_GENRES = {
    "journal article": Genre.JOURNAL_ARTICLE,
    "review": Genre.JOURNAL_ARTICLE,
    "clinical trial": Genre.JOURNAL_ARTICLE,
    "preprint": Genre.PREPRINT,
    "congress": Genre.PROCEEDINGS,
}
_REPOSITORY_GENRES = {
    "art": Genre.JOURNAL_ARTICLE,
    "article": Genre.JOURNAL_ARTICLE,
    "journal-article": Genre.JOURNAL_ARTICLE,
    "comm": Genre.PROCEEDINGS,
    "conference": Genre.PROCEEDINGS,
    "proceedings": Genre.PROCEEDINGS,
    "undefined": Genre.PREPRINT,
    "preprint": Genre.PREPRINT,
    "couv": Genre.BOOK_CHAPTER,
    "book-chapter": Genre.BOOK_CHAPTER,
    "thesis": Genre.THESIS,
    "these": Genre.THESIS,
}

_CROSSREF_MAP = {
    "source_id": ["DOI"],
    "doi": ["DOI"],
    "title": ["title"],
    "authors": ["author"],
    "raw_affiliations": ["author.*.affiliation.*.name"],
    "journal_issns": ["ISSN"],
    "journal_title": ["container-title"],
    "publisher": ["publisher"],
    "year": ["issued.date-parts.0.0", "published.date-parts.0.0"],
    "genre": ["type"],
    "related_identifiers": ["relation"],
    "licenses": ["license.*.URL"],
    "keywords": ["subject"],
}
_PUBMED_MAP = {
    "source_id": ["pmid"],
    "doi": ["doi"],
    "pid:pmid": ["pmid"],
    "title": ["title"],
    "authors": ["authors"],
    "raw_affiliations": ["authors.*.affiliations"],
    "journal_issns": ["journal.issn"],
    "journal_title": ["journal.title"],
    "year": ["year", "pub_date"],
    "genre": ["publication_types.0", "publication_type"],
    "keywords": ["keywords", "mesh_terms"],
}
_REPOSITORY_MAP = {
    "source_id": ["id"],
    "doi": ["doi"],
    "alternate_pids": ["pids"],
    "title": ["title"],
    "authors": ["authors"],
    "raw_affiliations": ["affiliations", "authors.*.affiliations"],
    "journal_issns": ["issn"],
    "journal_title": ["journal"],
    "publisher": ["publisher"],
    "year": ["year", "date"],
    "genre": ["type"],
    "related_identifiers": ["relatedIdentifiers"],
    "licenses": ["licenses", "license"],
    "keywords": ["keywords"],
}

BUILTIN_ADAPTERS: dict[str, tuple[dict[str, list[str]], dict[str, Genre]]] = {
    "crossref": (_CROSSREF_MAP, _CROSSREF_GENRES),
    "pubmed": (_PUBMED_MAP, _PUBMED_GENRES),
    "repository": (_REPOSITORY_MAP, _REPOSITORY_GENRES),
    # no published schema for institutional contributions; they reuse the repository layout
    "institution": (_REPOSITORY_MAP, _REPOSITORY_GENRES),
    "other": (_REPOSITORY_MAP, _REPOSITORY_GENRES),
}


def build_adapter(
    source: Union[str, Source],
    base: Optional[str] = None,
    field_map: Optional[dict[str, Any]] = None,
    genre_map: Optional[dict[str, str]] = None,
) -> SourceAdapter:
    """Built-in adapter for `base` (defaults to the source name), with optional overrides."""
    source = Source(source)
    base = base or source.value
    if base not in BUILTIN_ADAPTERS:
        raise IngestError(f"unknown adapter {base!r}; choose from {sorted(BUILTIN_ADAPTERS)}")
    fm, gm = BUILTIN_ADAPTERS[base]
    fm = {k: list(v) for k, v in fm.items()}
    gm = dict(gm)
    for target, paths in (field_map or {}).items():
        fm[target] = [paths] if isinstance(paths, str) else list(paths)
    for raw, genre in (genre_map or {}).items():
        try:
            gm[str(raw).strip().lower()] = Genre(genre)
        except ValueError as exc:
            raise IngestError(f"genre_map: {genre!r} is not a known genre") from exc
    return SourceAdapter(source=source, field_map=fm, genre_map=gm)
