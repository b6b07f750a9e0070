"""Duplicate detection (union-find over PID, version-link and title/author edges) and priority merging."""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from typing import Any, Iterable, Optional, Sequence, Union

from .records import (
    Author,
    Genre,
    PublicationRecord,
    Source,
    dedupe_keyed,
    normalize_doi,
    normalize_text,
)

VERSION_RELATIONS = frozenset({"IsVersionOf", "HasVersion", "IsIdenticalTo", "IsPreprintOf", "HasPreprint"})
SCALAR_FIELDS = ("title", "year", "genre", "publisher", "journal_title")
LIST_FIELDS = (
    "authors",
    "raw_affiliations",
    "keywords",
    "licenses",
    "journal_issns",
    "alternate_pids",
    "related_identifiers",
)
MERGE_NO_PID = "MERGE_NO_PID"

Provenance = tuple[str, str]  # (source, source_id)


class MergeError(Exception):
    def __init__(self, code: str, members: Sequence[Provenance]):
        super().__init__(f"{code}: {', '.join(f'{s}/{i}' for s, i in members)}")
        self.code = code
        self.members = list(members)


class SourcePriority:
    """Ordered sources, highest priority first. Unlisted sources rank after all listed ones."""

    def __init__(self, order: Iterable[Union[str, Source]]):
        self.order = [Source(s) for s in order]
        if len(set(self.order)) != len(self.order):
            raise ValueError("source priority lists a source more than once")
        if Source.CROSSREF not in self.order:
            raise ValueError("source priority must include crossref")
        self._rank = {s.value: i for i, s in enumerate(self.order)}

    def rank(self, source: Union[str, Source]) -> int:
        key = source.value if isinstance(source, Source) else source
        return self._rank.get(key, len(self._rank))

    def key(self, prov: Provenance) -> tuple[int, str]:
        # equal-priority ties fall back to lexicographic source_id
        return self.rank(prov[0]), prov[1]

    def __repr__(self) -> str:
        return f"SourcePriority({[s.value for s in self.order]})"


DEFAULT_PRIORITY = SourcePriority(["crossref", "pubmed", "repository", "institution", "other"])


@dataclass
class MergedPublication:
    canonical_pid: Optional[tuple[str, str]]
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
    field_provenance: dict[str, Provenance] = field(default_factory=dict)
    member_sources: list[Provenance] = field(default_factory=list)
    countries: list[str] = field(default_factory=list)
    discipline: Optional[str] = None

    @property
    def pid(self) -> str:
        scheme, value = self.canonical_pid
        return value if scheme == "doi" else f"{scheme}:{value}"

    def to_dict(self) -> dict[str, Any]:
        return {
            "canonical_pid": list(self.canonical_pid) if self.canonical_pid else None,
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
            "field_provenance": {
                k: {"source": s, "source_id": i} for k, (s, i) in self.field_provenance.items()
            },
            "member_sources": [list(m) for m in self.member_sources],
            "countries": list(self.countries),
            "discipline": self.discipline,
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "MergedPublication":
        cp = d.get("canonical_pid")
        return cls(
            canonical_pid=tuple(cp) if cp else None,
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
            field_provenance={
                k: (v["source"], v["source_id"]) for k, v in (d.get("field_provenance") or {}).items()
            },
            member_sources=[tuple(m) for m in d.get("member_sources") or []],
            countries=list(d.get("countries") or []),
            discipline=d.get("discipline"),
        )


Item = Union[PublicationRecord, MergedPublication]


# --- list-field keys ---------------------------------------------------------

def _list_key(name: str):
    if name in ("raw_affiliations", "keywords", "licenses"):
        return normalize_text
    if name == "authors":
        return Author.key
    return lambda v: v


def _merge_authors(authors: Iterable[Author]) -> list[Author]:
    merged: dict[tuple[str, str], Author] = {}
    for a in authors:
        k = a.key()
        if k not in merged:
            merged[k] = a
            continue
        cur = merged[k]
        if (cur.orcid is None and a.orcid) or (cur.person_pid is None and a.person_pid):
            merged[k] = Author(
                family=cur.family,
                given=cur.given,
                orcid=cur.orcid or a.orcid,
                person_pid=cur.person_pid or a.person_pid,
            )
    return list(merged.values())


def _populated(name: str, value: Any) -> bool:
    if name == "genre":
        return value is not None and value != Genre.OTHER
    if isinstance(value, str):
        return bool(value.strip())
    return value is not None


def lift(rec: PublicationRecord) -> MergedPublication:
    """A single record viewed as a one-member merge result."""
    prov = (rec.source.value, rec.source_id)
    fp = {f: prov for f in SCALAR_FIELDS if _populated(f, getattr(rec, f))}
    fp["genre"] = prov
    pid = rec.pid()
    if rec.doi:
        fp["doi"] = prov
    if pid:
        fp["canonical_pid"] = prov
    out = MergedPublication(
        canonical_pid=pid,
        title=rec.title,
        doi=rec.doi,
        journal_title=rec.journal_title,
        publisher=rec.publisher,
        year=rec.year,
        genre=rec.genre,
        field_provenance=fp,
        member_sources=[prov],
    )
    for name in LIST_FIELDS:
        values = list(getattr(rec, name))
        if name == "authors":
            setattr(out, name, _merge_authors(values))
        else:
            setattr(out, name, dedupe_keyed(values, key=_list_key(name)))
    return out


def _as_unit(item: Item) -> MergedPublication:
    return lift(item) if isinstance(item, PublicationRecord) else item


# --- clustering ---------------------------------------------------------------

class UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))
        self.size = [1] * n

    def find(self, x: int) -> int:
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a: int, b: int) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if self.size[ra] < self.size[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        self.size[ra] += self.size[rb]
        return True

    def groups(self) -> list[list[int]]:
        by_root: dict[int, list[int]] = defaultdict(list)
        for i in range(len(self.parent)):
            by_root[self.find(i)].append(i)
        return sorted(by_root.values(), key=lambda g: g[0])


def _pid_set(item: Item) -> set[tuple[str, str]]:
    pids = {(s.lower(), v) for s, v in item.alternate_pids}
    if item.doi:
        pids.add(("doi", item.doi))
    return pids


def _relation_target(scheme: str, value: str) -> Optional[tuple[str, str]]:
    scheme = scheme.lower()
    if scheme == "doi":
        value = normalize_doi(value)
        if value is None:
            return None
    return scheme, value


def _family_names(item: Item) -> set[str]:
    return {k for k in (normalize_text(a.family) for a in item.authors) if k}


def title_author_match(a: Item, b: Item) -> bool:
    """Heuristic edge: same normalized title, a shared family name, years within one."""
    ta = normalize_text(a.title)
    if not ta or ta != normalize_text(b.title):
        return False
    if a.year is None or b.year is None or abs(a.year - b.year) > 1:
        return False
    # preprint/published pairs only merge through explicit relation links
    if (a.genre == Genre.PREPRINT) != (b.genre == Genre.PREPRINT):
        return False
    return bool(_family_names(a) & _family_names(b))


def cluster_edges(items: Sequence[Item]) -> list[tuple[int, int, str]]:
    """Edges connecting items, blocked by key so only candidate pairs are compared."""
    edges: list[tuple[int, int, str]] = []

    by_doi: dict[str, list[int]] = defaultdict(list)
    by_alt: dict[tuple[str, str], list[int]] = defaultdict(list)
    by_pid: dict[tuple[str, str], list[int]] = defaultdict(list)
    by_title: dict[str, list[int]] = defaultdict(list)
    for i, item in enumerate(items):
        if item.doi:
            by_doi[item.doi].append(i)
        else:
            for p in {(s.lower(), v) for s, v in item.alternate_pids}:
                by_alt[p].append(i)
        for p in _pid_set(item):
            by_pid[p].append(i)
        t = normalize_text(item.title)
        if t:
            by_title[t].append(i)

    for members in by_doi.values():
        edges.extend((members[0], j, "doi") for j in members[1:])
    for members in by_alt.values():
        edges.extend((members[0], j, "alternate_pid") for j in members[1:])
    for i, item in enumerate(items):
        for rel, scheme, value in item.related_identifiers:
            if rel not in VERSION_RELATIONS:
                continue
            target = _relation_target(scheme, value)
            if target is None:
                continue
            edges.extend((i, j, "version_group") for j in by_pid.get(target, ()) if j != i)
    for members in by_title.values():
        for x in range(len(members)):
            for y in range(x + 1, len(members)):
                i, j = members[x], members[y]
                if title_author_match(items[i], items[j]):
                    edges.append((i, j, "title_author"))
    return edges


def cluster_indices(items: Sequence[Item]) -> list[list[int]]:
    uf = UnionFind(len(items))
    for i, j, _ in cluster_edges(items):
        uf.union(i, j)
    return uf.groups()


def cluster_records(records: Sequence[Item]) -> list[list[Item]]:
    """Partition `records` into connected components of the duplicate-edge relation."""
    return [[records[i] for i in group] for group in cluster_indices(records)]


# --- merging ------------------------------------------------------------------

def _best_rank(unit: MergedPublication, priority: SourcePriority) -> tuple[int, str]:
    return min(priority.key(m) for m in unit.member_sources)


def merge_cluster(cluster: Sequence[Item], priority: SourcePriority = DEFAULT_PRIORITY) -> MergedPublication:
    """Merge duplicates: scalars from the best-ranked member holding them, lists as keyed unions."""
    if not cluster:
        raise ValueError("cannot merge an empty cluster")
    units = sorted((_as_unit(c) for c in cluster), key=lambda u: _best_rank(u, priority))
    members = sorted({m for u in units for m in u.member_sources}, key=priority.key)

    out = MergedPublication(canonical_pid=None, title="", member_sources=members)
    provenance: dict[str, Provenance] = {}
    for name in SCALAR_FIELDS:
        candidates = [
            (u.field_provenance[name], getattr(u, name))
            for u in units
            if name in u.field_provenance and _populated(name, getattr(u, name))
        ]
        if candidates:
            prov, value = min(candidates, key=lambda c: priority.key(c[0]))
            setattr(out, name, value)
            provenance[name] = prov

    with_pid = [u for u in units if u.canonical_pid is not None]
    if not with_pid:
        raise MergeError(MERGE_NO_PID, members)
    best = min(
        with_pid,
        key=lambda u: (u.canonical_pid[0] != "doi", priority.key(u.field_provenance["canonical_pid"])),
    )
    out.canonical_pid = best.canonical_pid
    provenance["canonical_pid"] = best.field_provenance["canonical_pid"]
    if best.canonical_pid[0] == "doi":
        out.doi = best.canonical_pid[1]
        provenance["doi"] = provenance["canonical_pid"]

    for name in LIST_FIELDS:
        values = [v for u in units for v in getattr(u, name)]
        if name == "alternate_pids":
            # DOIs of non-canonical members (e.g. a linked preprint) are kept as alternates
            values += [("doi", u.doi) for u in units if u.doi and u.doi != out.doi]
        if name == "authors":
            setattr(out, name, _merge_authors(values))
        else:
            setattr(out, name, dedupe_keyed(values, key=_list_key(name)))

    if "genre" not in provenance:
        provenance["genre"] = members[0]
    out.countries = sorted({c for u in units for c in u.countries})
    out.discipline = next((u.discipline for u in units if u.discipline), None)
    out.field_provenance = provenance
    return out


@dataclass(frozen=True)
class DedupReject:
    members: tuple[Provenance, ...]
    reason: str

    def to_dict(self) -> dict[str, Any]:
        return {"members": [list(m) for m in self.members], "reason": self.reason}


def dedup_corpus(
    records: Sequence[Item], priority: SourcePriority = DEFAULT_PRIORITY
) -> tuple[list[MergedPublication], list[DedupReject]]:
    """Cluster and merge, re-checking merged outputs until no edge joins two of them.

    The re-check makes the result a fixed point, so deduplicating the output again
    returns it unchanged.
    """
    groups = cluster_indices(records)
    while True:
        merged: list[MergedPublication] = []
        kept_groups: list[list[int]] = []
        rejected_groups: list[list[int]] = []
        rejects: list[DedupReject] = []
        for group in groups:
            try:
                merged.append(merge_cluster([records[i] for i in group], priority))
                kept_groups.append(group)
            except MergeError as exc:
                rejects.append(DedupReject(tuple(exc.members), exc.code))
                rejected_groups.append(group)
        uf = UnionFind(len(merged))
        changed = False
        for i, j, _ in cluster_edges(merged):
            changed |= uf.union(i, j)
        if not changed:
            break
        groups = [sorted(i for g in comp for i in kept_groups[g]) for comp in uf.groups()]
        groups = sorted(groups + rejected_groups, key=lambda g: g[0])
    merged.sort(key=lambda m: m.canonical_pid)
    return merged, rejects
