"""Canonical publication model and the normalization primitives shared by every stage."""

from __future__ import annotations

import datetime as _dt
import re
import unicodedata
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Iterable, Optional


class Source(str, Enum):
    CROSSREF = "crossref"
    PUBMED = "pubmed"
    REPOSITORY = "repository"
    INSTITUTION = "institution"
    OTHER = "other"


class Genre(str, Enum):
    JOURNAL_ARTICLE = "journal-article"
    PROCEEDINGS = "proceedings"
    PREPRINT = "preprint"
    BOOK_CHAPTER = "book-chapter"
    THESIS = "thesis"
    OTHER = "other"


YEAR_MIN = 1500

_DOI_PREFIXES = (
    "https://doi.org/",
    "http://doi.org/",
    "https://dx.doi.org/",
    "http://dx.doi.org/",
    "doi.org/",
    "dx.doi.org/",
    "doi:",
)
_DOI_RE = re.compile(r"^10\.\d{4,9}/\S+$")
_ORCID_RE = re.compile(r"^\d{4}-\d{4}-\d{4}-\d{3}[\dX]$")
_ISSN_RE = re.compile(r"^\d{7}[\dX]$")

# Characters NFKD does not decompose into base letter + combining mark.
_LATIN_SPECIAL = {
    "ß": "ss", "ẞ": "ss", "æ": "ae", "Æ": "ae", "œ": "oe", "Œ": "oe",
    "ø": "o", "Ø": "o", "đ": "d", "Đ": "d", "ð": "d", "Ð": "d",
    "þ": "th", "Þ": "th", "ł": "l", "Ł": "l", "ı": "i", "ħ": "h",
    "Ħ": "h", "ŋ": "ng", "Ŋ": "ng", "ĸ": "k", "ŀ": "l", "Ŀ": "l",
    "ſ": "s", "ŧ": "t", "Ŧ": "t",
}


def _build_fold_table() -> dict[int, str]:
    # Latin-1 Supplement through Latin Extended-B, frozen at import time.
    table: dict[int, str] = {}
    for cp in range(0x00C0, 0x0250):
        ch = chr(cp)
        if ch in _LATIN_SPECIAL:
            table[cp] = _LATIN_SPECIAL[ch]
            continue
        base = "".join(c for c in unicodedata.normalize("NFKD", ch) if not unicodedata.combining(c))
        if base != ch and base.isascii():
            table[cp] = base
    for ch, repl in _LATIN_SPECIAL.items():
        table[ord(ch)] = repl
    return table


LATIN_FOLD = _build_fold_table()
_NON_ALNUM = re.compile(r"[^a-z0-9]+")


def normalize_text(raw: Optional[str]) -> str:
    """Lowercase, fold Latin diacritics, collapse every non-alphanumeric run to one space."""
    if not raw:
        return ""
    folded = raw.translate(LATIN_FOLD).lower()
    # lower() may surface new foldable characters (e.g. from title-case letters)
    folded = folded.translate(LATIN_FOLD)
    folded = "".join(c for c in folded if not unicodedata.combining(c))
    return _NON_ALNUM.sub(" ", folded).strip()


def normalize_doi(raw: Optional[str]) -> Optional[str]:
    """Return the canonical (lowercase, prefix-free) DOI, or None if `raw` is not one."""
    if not raw or not isinstance(raw, str):
        return None
    doi = raw.strip().lower()
    for prefix in _DOI_PREFIXES:
        if doi.startswith(prefix):
            doi = doi[len(prefix):].strip()
            break
    return doi if _DOI_RE.match(doi) else None


def orcid_checksum_ok(orcid: str) -> bool:
    # ISO 7064 MOD 11-2 over the first 15 digits
    digits = orcid.replace("-", "")
    total = 0
    for ch in digits[:-1]:
        total = (total + int(ch)) * 2
    check = (12 - total % 11) % 11
    expected = "X" if check == 10 else str(check)
    return digits[-1] == expected


def normalize_orcid(raw: Optional[str]) -> Optional[str]:
    if not raw or not isinstance(raw, str):
        return None
    value = raw.strip().upper()
    for prefix in ("HTTPS://ORCID.ORG/", "HTTP://ORCID.ORG/", "ORCID.ORG/"):
        if value.startswith(prefix):
            value = value[len(prefix):]
    if _ORCID_RE.match(value) and orcid_checksum_ok(value):
        return value
    return None


def normalize_issn(raw: Optional[str]) -> Optional[str]:
    """ISSN as 8 characters, no hyphen, uppercase check character."""
    if not raw or not isinstance(raw, str):
        return None
    value = raw.strip().upper().replace("-", "").replace(" ", "")
    return value if _ISSN_RE.match(value) else None


@dataclass(frozen=True)
class Author:
    family: str
    given: Optional[str] = None
    orcid: Optional[str] = None
    person_pid: Optional[tuple[str, str]] = None

    def key(self) -> tuple[str, str]:
        return normalize_text(self.family), normalize_text(self.given)

    def to_dict(self) -> dict[str, Any]:
        return {
            "family": self.family,
            "given": self.given,
            "orcid": self.orcid,
            "person_pid": list(self.person_pid) if self.person_pid else None,
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "Author":
        pp = d.get("person_pid")
        return cls(
            family=d.get("family") or "",
            given=d.get("given"),
            orcid=d.get("orcid"),
            person_pid=tuple(pp) if pp else None,
        )


@dataclass
class PublicationRecord:
    """One source's metadata for one research output."""

    source_id: str
    source: Source
    title: str
    doi: Optional[str] = None
    alternate_pids: list[tuple[str, str]] = field(default_factory=list)
    authors: list[Author] = field(default_factory=list)
    raw_affiliations: list[str] = field(default_factory=list)
    journal_issns: list[str] = field(default_factory=list)
    journal_title: Optional[str] = None
    publisher: Optional[str] = None
    year: Optional[int] = None
    genre: Genre = Genre.OTHER
    related_identifiers: list[tuple[str, str, str]] = field(default_factory=list)
    licenses: list[str] = field(default_factory=list)
    keywords: list[str] = field(default_factory=list)

    def pid(self) -> Optional[tuple[str, str]]:
        if self.doi:
            return ("doi", self.doi)
        if self.alternate_pids:
            return self.alternate_pids[0]
        return None

    def to_dict(self) -> dict[str, Any]:
        return {
            "source_id": self.source_id,
            "source": self.source.value,
            "title": self.title,
            "doi": self.doi,
            "alternate_pids": [list(p) for p in self.alternate_pids],
            "authors": [a.to_dict() for a in self.authors],
            "raw_affiliations": list(self.raw_affiliations),
            "journal_issns": list(self.journal_issns),
            "journal_title": self.journal_title,
            "publisher": self.publisher,
            "year": self.year,
            "genre": self.genre.value,
            "related_identifiers": [list(r) for r in self.related_identifiers],
            "licenses": list(self.licenses),
            "keywords": list(self.keywords),
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "PublicationRecord":
        return cls(
            source_id=d["source_id"],
            source=Source(d["source"]),
            title=d.get("title") or "",
            doi=d.get("doi"),
            alternate_pids=[tuple(p) for p in d.get("alternate_pids") or []],
            authors=[Author.from_dict(a) for a in d.get("authors") or []],
            raw_affiliations=list(d.get("raw_affiliations") or []),
            journal_issns=list(d.get("journal_issns") or []),
            journal_title=d.get("journal_title"),
            publisher=d.get("publisher"),
            year=d.get("year"),
            genre=Genre(d.get("genre") or "other"),
            related_identifiers=[tuple(r) for r in d.get("related_identifiers") or []],
            licenses=list(d.get("licenses") or []),
            keywords=list(d.get("keywords") or []),
        )


@dataclass(frozen=True)
class Violation:
    field: str
    rule: str

    def __str__(self) -> str:
        return f"{self.field}: {self.rule}"


def validate_record(rec: PublicationRecord, current_year: Optional[int] = None) -> list[Violation]:
    """Check the record invariants. An empty list means the record is admissible."""
    if current_year is None:
        current_year = _dt.date.today().year
    out: list[Violation] = []
    if not str(rec.source_id or "").strip():
        out.append(Violation("source_id", "must be non-empty"))
    if rec.doi is not None and normalize_doi(rec.doi) != rec.doi:
        out.append(Violation("doi", "must be canonical (lowercase, no resolver prefix, starts with 10.)"))
    if not normalize_text(rec.title):
        out.append(Violation("title", "must be non-empty after normalization"))
    if rec.year is not None:
        if isinstance(rec.year, bool) or not isinstance(rec.year, int):
            out.append(Violation("year", "must be an integer"))
        elif not YEAR_MIN <= rec.year <= current_year + 2:
            out.append(Violation("year", f"must be in [{YEAR_MIN}, {current_year + 2}]"))
    for i, author in enumerate(rec.authors):
        if author.orcid is not None and normalize_orcid(author.orcid) != author.orcid:
            out.append(Violation(f"authors[{i}].orcid", "must be a valid ORCID with correct check digit"))
    for i, issn in enumerate(rec.journal_issns):
        if normalize_issn(issn) != issn:
            out.append(Violation(f"journal_issns[{i}]", "must be a normalized 8-character ISSN"))
    return out


def dedupe_keyed(items: Iterable[Any], key) -> list[Any]:
    """Order-preserving removal of items whose key was already seen."""
    seen: set = set()
    out = []
    for item in items:
        k = key(item)
        if k in seen:
            continue
        seen.add(k)
        out.append(item)
    return out


def pid_string(pid: tuple[str, str]) -> str:
    """DOIs are bare; any other scheme is written `scheme:value`."""
    scheme, value = pid
    return value if scheme == "doi" else f"{scheme}:{value}"
