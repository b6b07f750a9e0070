#!/usr/bin/env python3
"""Generate the bundled end-to-end fixture under tests/fixtures/pipeline.

Every record is derived from a small ground-truth table of works. The same table yields
expected.json, a set of counts computed here without importing osmon, which the test
suite compares against the pipeline's report.

    python3 scripts/make_pipeline_fixture.py [--out tests/fixtures/pipeline]
"""

from __future__ import annotations

import argparse
import csv
import json
import random
import re
import statistics
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

ROOT = Path(__file__).resolve().parents[1]
SEED = 20230115
SNAPSHOTS = ("2023-01-15", "2023-07-15", "2024-01-15")
THRESHOLD = 0.5


def issn(base7: str) -> str:
    s = sum(int(d) * w for d, w in zip(base7, range(8, 1, -1)))
    check = (11 - s % 11) % 11
    c = "X" if check == 10 else str(check)
    return f"{base7[:4]}-{base7[4:]}{c}"


# name, issn, registry (is_open, apc, currency) or None, taxonomy category or None
JOURNALS = {
    "diamond": ("Journal of Open Mathematics", issn("2100001"), (True, "0", "EUR"), "mathematics"),
    "gold": ("Open Medical Letters", issn("2100002"), (True, "1800", "EUR"), "medicine"),
    "hybrid": ("Annals of Applied Inquiry", issn("2100003"), (False, "3000", "USD"), None),
    "sub": ("Transactions of the Old Society", issn("2100004"), None, None),
}

AFFILIATIONS = {
    "FR": [
        "CNRS, Paris, France",
        "Université de Strasbourg, Strasbourg, France",
        "Inria, Grenoble, France",
        "Laboratoire de Physique, ENS de Lyon, Lyon, France",
        "Institut Pasteur, Paris, France",
    ],
    "US": ["Stanford University, Stanford, CA, USA"],
    "GB": ["Department of Physics, University of Oxford, Oxford, United Kingdom"],
    "": ["Independent Research Lab"],
}

FILLER = "on the observed patterns across recent samples from field campaigns".split()
FAMILIES = ["Martin", "Bernard", "Dubois", "Thomas", "Robert", "Richard", "Petit", "Durand", "Leroy",
            "Moreau", "Simon", "Laurent", "Lefebvre", "Michel", "Garcia", "David", "Bertrand", "Roux"]
GIVEN = ["Alice", "Louis", "Camille", "Hugo", "Léa", "Jules", "Chloé", "Nathan", "Inès", "Paul"]

# OA trajectories over the three snapshots: C closed, X absent from snapshot,
# P publisher, R repository, B both
TRAJECTORIES = ["CCC", "CRR", "RRB", "PPP", "XCR", "CPB", "BBB", "XXP", "RRR", "CCP"]
LICENSES = [None, "https://creativecommons.org/licenses/by/4.0/", "cc-by-nc-nd", "https://publisher.example/tdm"]


@dataclass
class Work:
    key: str
    pattern: str  # which sources carry it and how they link
    year: int
    genre: str = "journal-article"
    journal: str = "sub"
    country: tuple[str, ...] = ("FR",)
    discipline: Optional[str] = None  # keyword category, or None for unclassifiable titles
    doi: Optional[str] = None
    title: str = ""
    authors: list[tuple[str, str]] = field(default_factory=list)
    affiliations: list[str] = field(default_factory=list)
    keywords: list[str] = field(default_factory=list)
    oa: str = "CCC"
    license: Optional[str] = None
    apc_direct: Optional[tuple[str, str]] = None
    mentions: dict[str, tuple[bool, bool, bool]] = field(default_factory=dict)
    in_corpus: bool = True


def load_keywords() -> dict[str, list[str]]:
    by_cat: dict[str, list[str]] = {}
    with open(ROOT / "src/osmon/data/taxonomy.csv", encoding="utf-8", newline="") as fh:
        for row in csv.DictReader(fh):
            if row["section"] == "keyword":
                by_cat.setdefault(row["category_id"], []).append(row["key"])
    return by_cat


def plan(rng: random.Random, keywords: dict[str, list[str]]) -> list[Work]:
    all_kw = {k.lower() for ks in keywords.values() for k in ks}
    assert not all_kw.intersection(FILLER + ["notes", "case"]), "filler words must not be taxonomy keywords"

    patterns = (
        ["cr+repo"] * 5 + ["cr+pm"] * 4 + ["cr+preprint"] * 2 + ["cr+repo_nodoi"] * 2 + ["cr+pm+repo"]
        + ["cr"] * 11 + ["pm_nodoi"] * 2 + ["repo_hal"] * 3
    )
    works: list[Work] = []
    cats = sorted(keywords)
    for i, pat in enumerate(patterns):
        journal = ["diamond", "gold", "hybrid", "hybrid", "sub"][i % 5]
        year = 2021 if journal == "hybrid" and i % 2 == 0 else 2019 + (i * 3) % 5
        country = ("FR", "US") if i % 7 == 3 else ("FR",)
        discipline = None if i % 9 == 8 else cats[i % len(cats)]
        works.append(Work(f"w{i:02d}", pat, year, journal=journal, country=country, discipline=discipline))

    # out of perimeter: too old, wrong genre, foreign only, no country at all
    works.append(Work("x00", "cr", 2015, journal="sub", discipline="physics_astronomy", in_corpus=False))
    works.append(Work("x01", "repo_hal", 2021, genre="thesis", discipline="humanities", in_corpus=False))
    works.append(Work("x02", "cr", 2022, journal="hybrid", country=("US",), discipline="chemistry", in_corpus=False))
    works.append(Work("x03", "pm", 2020, journal="gold", country=("GB",), discipline="medicine", in_corpus=False))
    works.append(Work("x04", "repo_hal", 2020, country=("",), discipline="biology", in_corpus=False))

    for n, w in enumerate(works):
        if w.pattern not in ("pm_nodoi", "repo_hal"):
            w.doi = f"10.5555/osmon.{w.key}"
        words = [] if w.discipline is None else _pick_keywords(rng, keywords, w.discipline)
        filler = rng.sample(FILLER, 4)
        w.title = " ".join([words[0].capitalize() if words else "Notes", *filler[:2], *words[1:], *filler[2:],
                            f"case {n}"])
        w.keywords = [words[1]] if words else []
        k = rng.randint(1, 3)
        w.authors = [(FAMILIES[(n * 5 + j) % len(FAMILIES)], GIVEN[(n + j) % len(GIVEN)]) for j in range(k)]
        w.affiliations = [rng.choice(AFFILIATIONS[c]) for c in w.country]
        w.oa = TRAJECTORIES[n % len(TRAJECTORIES)]
        w.license = LICENSES[n % len(LICENSES)] if any(s in "PB" for s in w.oa) else None
        if n % 6 == 1 and w.doi:
            w.apc_direct = (f"{rng.randint(900, 2600)}.{rng.randint(0, 99):02d}", "EUR")
        w.mentions = {
            kind: (rng.random() < 0.6, rng.random() < 0.35, rng.random() < 0.4)
            for kind in ("dataset", "software")
            if rng.random() < 0.7
        }
    return works


def _tokens(text: str) -> list[str]:
    return re.sub(r"[^a-z0-9]+", " ", text.lower()).split()


def _pick_keywords(rng: random.Random, keywords: dict[str, list[str]], cat: str) -> list[str]:
    """Two keywords of `cat` whose tokens do not spell any other category's keyword."""
    others = [_tokens(k) for c, ks in keywords.items() if c != cat for k in ks]
    while True:
        words = rng.sample(keywords[cat], 2)
        toks = _tokens(" ".join(words))
        if not any(any(toks[i:i + len(o)] == o for i in range(len(toks))) for o in others):
            return words


def effective_discipline(w: Work) -> str:
    """A journal mapped in the taxonomy wins over title keywords."""
    mapped = JOURNALS[w.journal][3]
    return mapped or w.discipline or "unclassified"


def _crossref(w: Work) -> dict:
    obj = {
        "DOI": w.doi.upper() if w.key.endswith("3") else w.doi,
        "title": [w.title],
        "author": [
            {"family": f, "given": g, "affiliation": [{"name": a} for a in w.affiliations] if j == 0 else []}
            for j, (f, g) in enumerate(w.authors)
        ],
        "ISSN": [JOURNALS[w.journal][1]],
        "container-title": [JOURNALS[w.journal][0]],
        "publisher": "Example Press",
        "issued": {"date-parts": [[w.year, 5, 1]]},
        "type": "journal-article" if w.genre == "journal-article" else w.genre,
        "subject": w.keywords,
    }
    if w.license:
        obj["license"] = [{"URL": w.license}]
    return obj


def _pubmed(w: Work, pmid: str, with_doi: bool) -> dict:
    return {
        "pmid": pmid,
        "doi": f"https://doi.org/{w.doi}" if with_doi else None,
        "title": w.title,
        "authors": [{"lastName": f, "foreName": g, "affiliations": w.affiliations} for f, g in w.authors],
        "journal": {"issn": JOURNALS[w.journal][1], "title": JOURNALS[w.journal][0]},
        "year": str(w.year),
        "publication_types": ["Journal Article"],
        "keywords": w.keywords,
    }


def _repository(w: Work, hal: str, *, doi: Optional[str], title: str, year: int, genre: str,
                related: Optional[list] = None) -> dict:
    obj = {
        "id": hal,
        "pids": [{"scheme": "hal", "value": hal}],
        "doi": doi,
        "title": title,
        "authors": [{"name": f"{g} {f}"} for f, g in w.authors],
        "affiliations": w.affiliations,
        "issn": [JOURNALS[w.journal][1]] if genre != "preprint" else [],
        "journal": JOURNALS[w.journal][0] if genre != "preprint" else None,
        "year": year,
        "type": genre,
        "keywords": w.keywords,
    }
    if related:
        obj["relatedIdentifiers"] = related
    return obj


def _variant(title: str) -> str:
    # same normalized form: case, punctuation and spacing differ
    return title.upper().replace(" ", "  ", 1) + "."


def emit_sources(works: list[Work]) -> tuple[list[str], list[str], list[str], dict[str, str]]:
    """Source lines per file and the canonical pid of each work."""
    cr, pm, repo = [], [], []
    pid: dict[str, str] = {}
    for n, w in enumerate(works):
        hal = f"hal-{3000000 + n:08d}"
        pmid = str(31000000 + n)
        p = w.pattern
        if p.startswith("cr"):
            cr.append(json.dumps(_crossref(w), ensure_ascii=False))
        if p == "cr+repo":
            repo.append(json.dumps(_repository(w, hal, doi=f"https://doi.org/{w.doi.upper()}", title=w.title,
                                               year=w.year, genre="article"), ensure_ascii=False))
        if p in ("cr+pm", "cr+pm+repo"):
            pm.append(json.dumps(_pubmed(w, pmid, True), ensure_ascii=False))
        if p == "cr+pm+repo":
            repo.append(json.dumps(_repository(w, hal, doi=f"doi:{w.doi}", title=w.title, year=w.year,
                                               genre="article"), ensure_ascii=False))
        if p == "cr+preprint":
            rel = [{"relationType": "IsPreprintOf", "relatedIdentifierType": "DOI", "relatedIdentifier": w.doi}]
            repo.append(json.dumps(_repository(w, hal, doi=None, title=f"{w.title} (preprint)", year=w.year - 1,
                                               genre="preprint", related=rel), ensure_ascii=False))
        if p == "cr+repo_nodoi":
            repo.append(json.dumps(_repository(w, hal, doi=None, title=_variant(w.title), year=w.year - 1,
                                               genre="article"), ensure_ascii=False))
        if p == "pm_nodoi":
            pm.append(json.dumps(_pubmed(w, pmid, False), ensure_ascii=False))
        if p == "pm":
            pm.append(json.dumps(_pubmed(w, pmid, True), ensure_ascii=False))
        if p == "repo_hal":
            repo.append(json.dumps(_repository(w, hal, doi=None, title=w.title, year=w.year, genre=w.genre),
                                   ensure_ascii=False))
        if w.doi:
            pid[w.key] = w.doi
        elif p == "pm_nodoi":
            pid[w.key] = f"pmid:{pmid}"
        else:
            pid[w.key] = f"hal:{hal}"
    # two lines that must be rejected at ingest
    repo.insert(3, '{"id": "hal-broken", "title": "Truncated')
    cr.insert(5, json.dumps({"DOI": "10.5555/osmon.untitled", "title": [""], "type": "journal-article"}))
    return cr, pm, repo, pid


def emit_snapshots(works: list[Work], pid: dict[str, str]) -> list[list[str]]:
    snaps: list[list[str]] = [[] for _ in SNAPSHOTS]
    for w in works:
        for s, state in enumerate(w.oa):
            if state == "X":
                continue
            locs = []
            if state in "PB":
                locs.append({"host_type": "publisher", "license": w.license, "url": f"https://example.org/{w.key}"})
            if state in "RB":
                locs.append({"host_type": "repository", "license": None, "repository_name": "HAL"})
            key = {"doi": w.doi} if w.doi else {"pid": pid[w.key]}
            snaps[s].append(json.dumps({**key, "locations": locs}, sort_keys=True))
    return snaps


def emit_apc(rng: random.Random, works: list[Work]) -> tuple[list[list[str]], dict[str, float]]:
    rows = [["doi", "issn", "year", "amount", "currency"]]
    for w in works:
        if w.apc_direct:
            rows.append([w.doi, "", str(w.year), *w.apc_direct])
    hybrid = JOURNALS["hybrid"][1]
    group = [f"{rng.randint(2500, 3500)}.{rng.randint(0, 99):02d}" for _ in range(5)]
    for k, amount in enumerate(group):
        rows.append([f"10.9999/ext.{k}", hybrid, "2021", amount, "USD"])
    for k in range(3):  # too small a group
        rows.append([f"10.9999/ext.small.{k}", hybrid, "2020", "2900.00", "USD"])
    sub = JOURNALS["sub"][1]
    for k, cur in enumerate(["EUR", "EUR", "EUR", "GBP", "GBP"]):  # mixed currencies
        rows.append([f"10.9999/ext.mixed.{k}", sub, "2022", "2000.00", cur])
    means = {f"{hybrid}:2021": statistics.mean(float(a) for a in group)}
    return rows, means


def expected_apc_method(w: Work, table_rows: list[list[str]]) -> str:
    # written from the fixture's own design, independently of osmon's estimator
    name, journal_issn, reg, _ = JOURNALS[w.journal]
    if w.apc_direct:
        return "direct"
    if reg and reg[0] and reg[1] == "0":
        return "diamond_zero"
    group = [r for r in table_rows[1:] if r[1] == journal_issn and r[2] == str(w.year)]
    if len(group) >= 5 and len({r[4] for r in group}) == 1:
        return "journal_year_average"
    if reg:
        return "registry_list_price"
    return "unknown"


def emit_mentions(rng: random.Random, works: list[Work], pid: dict[str, str]) -> tuple[list[str], int]:
    """Mention lines and how many of them refer to documents outside the corpus."""
    lines, outside = [], 0
    for w in works:
        for kind, (uses, creates, shares) in sorted(w.mentions.items()):
            n = rng.randint(1, 3)
            hit = rng.randrange(n)  # one mention carries the positive signals
            outside += 0 if w.in_corpus else n
            for j in range(n):
                def p(flag: bool) -> float:
                    if flag and j == hit:
                        return round(rng.uniform(0.55, 0.99), 3)
                    return round(rng.uniform(0.0, 0.45), 3)
                lines.append(json.dumps({
                    "document_pid": pid[w.key] if not w.doi or j % 2 == 0 else f"https://doi.org/{w.doi}",
                    "object_kind": kind,
                    "mention_text": f"{kind} mention {j} in {w.key}",
                    "p_used": p(uses), "p_created": p(creates), "p_shared": p(shares),
                }))
    lines.insert(7, json.dumps({"document_pid": "10.5555/osmon.w01", "object_kind": "dataset",
                                "mention_text": "bad", "p_used": 1.2, "p_created": 0.1, "p_shared": 0.1}))
    return lines, outside


def expected_counts(works: list[Work], pid: dict[str, str], apc_rows, apc_means, outside: int) -> dict:
    corpus = [w for w in works if w.in_corpus]
    in_perimeter = [w for w in works if 2019 <= w.year <= 2023 and w.genre != "thesis"]
    disciplines = Counter(effective_discipline(w) for w in corpus)
    countries = Counter(c for w in corpus for c in w.country if c)
    open_per_snapshot = {
        day: sum(w.oa[s] in "PRB" for w in corpus) for s, day in enumerate(SNAPSHOTS)
    }
    routes = {
        day: dict(Counter({"C": "closed", "X": "closed", "P": "publisher", "R": "repository",
                           "B": "publisher_repository"}[w.oa[s]] for w in corpus))
        for s, day in enumerate(SNAPSHOTS)
    }
    last = len(SNAPSHOTS) - 1
    scope = [w for w in corpus if w.oa[last] in "PB"]
    methods = Counter(expected_apc_method(w, apc_rows) for w in corpus)
    scoped_methods = Counter(expected_apc_method(w, apc_rows) for w in scope)

    def bm(w: Work) -> str:
        reg = JOURNALS[w.journal][2]
        if reg and reg[0]:
            return "diamond" if reg[1] == "0" else "gold"
        return "hybrid" if w.license else "publisher_free_to_read"

    business = {
        day: dict(Counter(bm(w) for w in corpus if w.oa[s] in "PB")) for s, day in enumerate(SNAPSHOTS)
    }
    funnel = {}
    for kind in ("dataset", "software"):
        flags = [w.mentions.get(kind, (False, False, False)) for w in corpus]
        den_or = [f for f in flags if f[0] or f[1]]
        den_and = [f for f in flags if f[0] and f[1]]
        funnel[kind] = {
            "or": [sum(f[2] for f in den_or), len(den_or)],
            "and": [sum(f[2] for f in den_and), len(den_and)],
        }
    source_records = sum(len(w.pattern.split("+")) for w in works)
    return {
        "input_lines": source_records + 2,
        "ingest_rejects": 2,
        "records": source_records,
        "merged_publications": len(works),
        "in_perimeter": len(in_perimeter),
        "in_country_perimeter": len(corpus),
        "corpus": len(corpus),
        "corpus_pids": sorted(pid[w.key] for w in corpus),
        "disciplines": dict(sorted(disciplines.items())),
        "countries": dict(sorted(countries.items())),
        "open_per_snapshot": open_per_snapshot,
        "routes_per_snapshot": routes,
        "business_models_per_snapshot": business,
        "apc_methods": dict(sorted(methods.items())),
        "apc_methods_in_scope": dict(sorted(scoped_methods.items())),
        "apc_group_means": apc_means,
        "funnel": funnel,
        "mention_rejects": 1,
        "mentions_dropped_outside_corpus": outside,
    }


CONFIG = """\
# End-to-end fixture; regenerate with scripts/make_pipeline_fixture.py
output_dir: out
sources:
  - {path: crossref.jsonl, source: crossref}
  - {path: pubmed.jsonl, source: pubmed}
  - {path: repository.jsonl, source: repository}
source_priority: [crossref, pubmed, repository, institution, other]
perimeter:
  genres: [journal-article, proceedings, preprint]
  year_min: 2019
  year_max: 2023
  countries: [FR]
taxonomy: taxonomy.csv
apc_table: apc.csv
journal_registry: registry.csv
apc_min_group: 5
snapshots:
  - oa-snapshot-2023-01-15.jsonl
  - oa-snapshot-2023-07-15.jsonl
  - oa-snapshot-2024-01-15.jsonl
mentions: [mentions.jsonl]
mentions_threshold: 0.5
funnel_denominator: or
"""


def write_lines(path: Path, lines: list[str]) -> None:
    path.write_text("".join(line + "\n" for line in lines), encoding="utf-8")


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", type=Path, default=ROOT / "tests/fixtures/pipeline")
    args = ap.parse_args()
    out: Path = args.out
    out.mkdir(parents=True, exist_ok=True)

    rng = random.Random(SEED)
    keywords = load_keywords()
    works = plan(rng, keywords)
    cr, pm, repo, pid = emit_sources(works)
    write_lines(out / "crossref.jsonl", cr)
    write_lines(out / "pubmed.jsonl", pm)
    write_lines(out / "repository.jsonl", repo)
    for day, lines in zip(SNAPSHOTS, emit_snapshots(works, pid)):
        write_lines(out / f"oa-snapshot-{day}.jsonl", lines)
    apc_rows, apc_means = emit_apc(rng, works)
    with open(out / "apc.csv", "w", encoding="utf-8", newline="") as fh:
        csv.writer(fh, lineterminator="\n").writerows(apc_rows)
    with open(out / "registry.csv", "w", encoding="utf-8", newline="") as fh:
        wr = csv.writer(fh, lineterminator="\n")
        wr.writerow(["issn", "is_open_journal", "apc_amount", "apc_currency"])
        for _, jissn, reg, _ in JOURNALS.values():
            if reg:
                wr.writerow([jissn, str(reg[0]).lower(), reg[1], reg[2]])
    taxonomy = (ROOT / "src/osmon/data/taxonomy.csv").read_text(encoding="utf-8")
    extra = "".join(f"issn,{j[1]},{j[3]},\n" for j in JOURNALS.values() if j[3])
    (out / "taxonomy.csv").write_text(taxonomy.rstrip("\n") + "\n" + extra, encoding="utf-8")
    mention_lines, outside = emit_mentions(rng, works, pid)
    write_lines(out / "mentions.jsonl", mention_lines)
    (out / "config.yaml").write_text(CONFIG, encoding="utf-8")
    expected = expected_counts(works, pid, apc_rows, apc_means, outside)
    (out / "expected.json").write_text(json.dumps(expected, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    print(f"wrote fixture to {out}: {expected['records']} records, {expected['corpus']} in corpus")


if __name__ == "__main__":
    main()
