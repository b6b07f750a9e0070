"""Single-label macro-discipline assignment: journal ISSN lookup, then weighted title/keyword scoring."""

from __future__ import annotations

import csv
import hashlib
from collections import Counter
from dataclasses import dataclass, field, replace
from decimal import Decimal, InvalidOperation
from enum import Enum
from importlib import resources
from pathlib import Path
from typing import Iterable, Optional, Union

from .records import normalize_issn, normalize_text

UNCLASSIFIED = "unclassified"


class TaxonomyError(ValueError):
    pass


class Basis(str, Enum):
    ISSN = "issn"
    KEYWORDS = "keywords"
    UNCLASSIFIED = "unclassified"


@dataclass
class Taxonomy:
    categories: list[tuple[str, str]]
    issn_map: dict[str, str] = field(default_factory=dict)
    keyword_weights: dict[tuple[str, str], Decimal] = field(default_factory=dict)
    checksum: Optional[str] = None

    def __post_init__(self) -> None:
        ids = [c for c, _ in self.categories]
        if len(set(ids)) != len(ids):
            raise TaxonomyError("category ids must be unique")
        if UNCLASSIFIED in ids:
            raise TaxonomyError(f"{UNCLASSIFIED!r} is reserved")
        known = set(ids)
        for issn, cat in self.issn_map.items():
            if cat not in known:
                raise TaxonomyError(f"issn {issn} maps to unknown category {cat!r}")
        for (kw, cat), w in self.keyword_weights.items():
            if cat not in known:
                raise TaxonomyError(f"keyword {kw!r} maps to unknown category {cat!r}")
            if not w > 0:
                raise TaxonomyError(f"keyword {kw!r} weight must be > 0")
        self._by_keyword: dict[tuple[str, ...], list[tuple[str, Decimal]]] = {}
        for (kw, cat), w in self.keyword_weights.items():
            self._by_keyword.setdefault(tuple(kw.split()), []).append((cat, w))

    @property
    def category_ids(self) -> list[str]:
        return [c for c, _ in self.categories]

    def scaled(self, factor: Union[Decimal, int, str]) -> "Taxonomy":
        factor = Decimal(factor)
        return replace(self, keyword_weights={k: w * factor for k, w in self.keyword_weights.items()})

    @classmethod
    def load(cls, path: Union[str, Path]) -> "Taxonomy":
        """CSV with columns section,key,category_id,value.

        section=category: key is the label; section=issn: key is the ISSN;
        section=keyword: key is the keyword and value its weight.
        """
        data = Path(path).read_bytes()
        categories: list[tuple[str, str]] = []
        issn_map: dict[str, str] = {}
        weights: dict[tuple[str, str], Decimal] = {}
        reader = csv.DictReader(data.decode("utf-8").splitlines())
        for n, row in enumerate(reader, start=2):
            section = (row.get("section") or "").strip().lower()
            key = (row.get("key") or "").strip()
            cat = (row.get("category_id") or "").strip()
            if not cat:
                raise TaxonomyError(f"row {n}: category_id is required")
            if section == "category":
                categories.append((cat, key))
            elif section == "issn":
                issn = normalize_issn(key)
                if issn is None:
                    raise TaxonomyError(f"row {n}: invalid ISSN {key!r}")
                issn_map[issn] = cat
            elif section == "keyword":
                kw = normalize_text(key)
                if not kw:
                    raise TaxonomyError(f"row {n}: empty keyword")
                try:
                    weights[(kw, cat)] = Decimal((row.get("value") or "").strip())
                except InvalidOperation as exc:
                    raise TaxonomyError(f"row {n}: weight must be a number") from exc
            else:
                raise TaxonomyError(f"row {n}: unknown section {section!r}")
        return cls(categories, issn_map, weights, checksum=hashlib.sha256(data).hexdigest())

    @classmethod
    def default(cls) -> "Taxonomy":
        with resources.as_file(resources.files("osmon") / "data" / "taxonomy.csv") as p:
            return cls.load(p)


def keyword_scores(text: str, tax: Taxonomy) -> dict[str, Decimal]:
    """Sum of weights of each taxonomy keyword present (at token boundaries) in `text`."""
    tokens = normalize_text(text).split()
    present: set[tuple[str, ...]] = set()
    for kw in tax._by_keyword:
        n = len(kw)
        if any(tuple(tokens[i:i + n]) == kw for i in range(len(tokens) - n + 1)):
            present.add(kw)
    scores: dict[str, Decimal] = {}
    for kw in present:
        for cat, w in tax._by_keyword[kw]:
            scores[cat] = scores.get(cat, Decimal(0)) + w
    return scores


def classify(pub, tax: Taxonomy) -> tuple[str, Basis]:
    for issn in pub.journal_issns:
        if issn in tax.issn_map:
            return tax.issn_map[issn], Basis.ISSN
    text = " ".join([pub.title or "", *pub.keywords])
    scores = keyword_scores(text, tax)
    if not scores:
        return UNCLASSIFIED, Basis.UNCLASSIFIED
    best = max(scores.values())
    return min(c for c, s in scores.items() if s == best), Basis.KEYWORDS


def classify_corpus(corpus: Iterable, tax: Taxonomy) -> tuple[list, dict[str, int]]:
    """Classified copies of `corpus` and the count per outcome (categories plus unclassified)."""
    out = []
    counts: Counter[str] = Counter()
    for pub in corpus:
        cat, _ = classify(pub, tax)
        counts[cat] += 1
        out.append(replace(pub, discipline=None if cat == UNCLASSIFIED else cat))
    return out, dict(sorted(counts.items()))
