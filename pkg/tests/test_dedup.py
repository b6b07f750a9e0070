import random

import pytest
from hypothesis import given, settings, strategies as st

from osmon.dedup import (
    DEFAULT_PRIORITY,
    MERGE_NO_PID,
    MergeError,
    MergedPublication,
    SourcePriority,
    cluster_records,
    dedup_corpus,
    lift,
    merge_cluster,
)
from osmon.jsonio import dumps_canonical
from osmon.records import Author, Genre, PublicationRecord, Source
from synth import oracle_components, random_corpus


def rec(sid, source="crossref", **kw):
    base = dict(source_id=sid, source=Source(source), title=f"title {sid}", year=2020,
                genre=Genre.JOURNAL_ARTICLE, authors=[Author("Doe")])
    base.update(kw)
    return PublicationRecord(**base)


def partition(clusters):
    return sorted(sorted(r.source_id for r in c) for c in clusters)


def test_same_doi_one_cluster():
    a = rec("a", doi="10.1234/abc")
    b = rec("b", "repository", doi="10.1234/abc", title="other")
    assert partition(cluster_records([a, b])) == [["a", "b"]]


def test_version_relation_one_cluster():
    a = rec("a", doi="10.5281/zenodo.8042997")
    b = rec("b", "repository", doi="10.5281/zenodo.8042998", title="v2",
            related_identifiers=[("IsVersionOf", "doi", "10.5281/zenodo.8042997")])
    assert partition(cluster_records([a, b])) == [["a", "b"]]


def test_non_version_relation_ignored():
    a = rec("a", doi="10.5281/zenodo.1")
    b = rec("b", doi="10.5281/zenodo.2", title="x", related_identifiers=[("Cites", "doi", "10.5281/zenodo.1")])
    assert len(cluster_records([a, b])) == 2


def test_same_title_disjoint_authors_two_clusters():
    a = rec("a", doi="10.1000/1", title="Same Title", authors=[Author("Doe")])
    b = rec("b", doi=None, alternate_pids=[("hal", "1")], title="same title!", authors=[Author("Roe")])
    assert len(cluster_records([a, b])) == 2
    c = rec("c", doi=None, alternate_pids=[("hal", "2")], title="SAME TITLE", authors=[Author("Dóe")], year=2021)
    assert partition(cluster_records([a, b, c])) == [["a", "c"], ["b"]]


def test_title_edge_year_window_and_preprint():
    a = rec("a", doi="10.1000/1", title="T", year=2020)
    far = rec("b", doi=None, alternate_pids=[("hal", "1")], title="T", year=2022)
    pre = rec("c", doi=None, alternate_pids=[("hal", "2")], title="T", year=2020, genre=Genre.PREPRINT)
    assert len(cluster_records([a, far, pre])) == 3


@pytest.mark.parametrize("seed", range(5))
def test_matches_bruteforce_oracle(seed):
    records = random_corpus(random.Random(seed), 120)
    got = {frozenset(id(r) for r in c) for c in cluster_records(records)}
    want = {frozenset(id(records[i]) for i in comp) for comp in oracle_components(records)}
    assert got == want


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6), st.integers(1, 20))
def test_oracle_property_small(seed, n):
    records = random_corpus(random.Random(seed), n)
    got = {frozenset(id(r) for r in c) for c in cluster_records(records)}
    want = {frozenset(id(records[i]) for i in comp) for comp in oracle_components(records)}
    assert got == want


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6))
def test_clusters_partition_input(seed):
    records = random_corpus(random.Random(seed), 60)
    clusters = cluster_records(records)
    flat = [id(r) for c in clusters for r in c]
    assert sorted(flat) == sorted(id(r) for r in records)


def test_merge_priority_example():
    cr = rec("c1", doi="10.1000/1", title="T1", publisher=None)
    repo = rec("r1", "repository", doi="10.1000/1", title="T2", publisher="P")
    m = merge_cluster([repo, cr])
    assert m.title == "T1" and m.field_provenance["title"] == ("crossref", "c1")
    assert m.publisher == "P" and m.field_provenance["publisher"] == ("repository", "r1")
    assert m.canonical_pid == ("doi", "10.1000/1")


def test_merge_singleton_identity():
    r = rec("s", "pubmed", doi="10.1000/9", publisher="P", journal_title="J",
            raw_affiliations=["A"], keywords=["k"])
    m = merge_cluster([r])
    for f in ("title", "doi", "year", "genre", "publisher", "journal_title", "raw_affiliations", "keywords"):
        assert getattr(m, f) == getattr(r, f)
    assert set(m.field_provenance.values()) == {("pubmed", "s")}


def test_merge_list_union():
    a = rec("a", doi="10.1000/1", raw_affiliations=["A"])
    b = rec("b", "repository", doi="10.1000/1", raw_affiliations=["A", "B"])
    assert merge_cluster([a, b]).raw_affiliations == ["A", "B"]


def test_merge_enriches_orcid_and_keeps_alternate_doi():
    a = rec("a", doi="10.1000/pub", authors=[Author("Doe", "J")])
    b = rec("b", "repository", doi="10.1000/pre", genre=Genre.PREPRINT,
            authors=[Author("doe", "j", "0000-0002-1825-0097")],
            related_identifiers=[("IsPreprintOf", "doi", "10.1000/pub")])
    m = merge_cluster([b, a])
    assert m.canonical_pid == ("doi", "10.1000/pub")
    assert ("doi", "10.1000/pre") in m.alternate_pids
    assert len(m.authors) == 1 and m.authors[0].orcid == "0000-0002-1825-0097"
    assert m.genre is Genre.JOURNAL_ARTICLE


def test_canonical_pid_falls_back_to_alternate():
    a = rec("a", "pubmed", alternate_pids=[("pmid", "1")])
    b = rec("b", "repository", alternate_pids=[("hal", "h")], title="title a")
    m = merge_cluster([b, a])
    assert m.canonical_pid == ("pmid", "1") and m.pid == "pmid:1"


def test_merge_no_pid():
    with pytest.raises(MergeError) as exc:
        merge_cluster([rec("a")])
    assert exc.value.code == MERGE_NO_PID
    merged, rejects = dedup_corpus([rec("a"), rec("b", doi="10.1000/2")])
    assert len(merged) == 1 and rejects[0].reason == MERGE_NO_PID


def test_priority_validation():
    with pytest.raises(ValueError):
        SourcePriority(["pubmed"])
    with pytest.raises(ValueError):
        SourcePriority(["crossref", "crossref"])
    prio = SourcePriority(["repository", "crossref"])
    m = merge_cluster([rec("a", doi="10.1000/1", title="C"), rec("b", "repository", doi="10.1000/1", title="R")], prio)
    assert m.title == "R"


def test_twelve_record_corpus_three_clusters():
    records = [rec(f"u{i}", doi=f"10.1000/u{i}") for i in range(6)]
    records += [rec("d1", doi="10.1000/d"), rec("d2", "pubmed", doi="10.1000/d", title="x")]
    records += [rec("v1", doi="10.1000/v"),
                rec("v2", "repository", alternate_pids=[("hal", "v")], title="y", genre=Genre.PREPRINT,
                    related_identifiers=[("IsPreprintOf", "doi", "10.1000/v")])]
    records += [rec("t1", doi="10.1000/t", title="Shared", authors=[Author("Ng")]),
                rec("t2", "repository", alternate_pids=[("hal", "t")], title="shared.", authors=[Author("NG")])]
    merged, rejects = dedup_corpus(records)
    assert len(merged) == 9 and not rejects
    assert [m.canonical_pid for m in merged] == sorted(m.canonical_pid for m in merged)


def test_unique_corpus_passes_through():
    records = [rec(f"u{i}", doi=f"10.1000/u{i}") for i in range(7)]
    merged, _ = dedup_corpus(records)
    assert len(merged) == 7


def _reencode(merged):
    lines = [dumps_canonical(m.to_dict()) for m in merged]
    return lines, [MergedPublication.from_dict(__import__("json").loads(x)) for x in lines]


@pytest.mark.parametrize("seed", range(5))
def test_dedup_idempotent(seed):
    records = random_corpus(random.Random(100 + seed), 150)
    first, _ = dedup_corpus(records)
    lines, decoded = _reencode(first)
    second, rejects = dedup_corpus(decoded)
    assert not rejects
    assert [dumps_canonical(m.to_dict()) for m in second] == lines


def test_lift_roundtrip():
    r = rec("a", doi="10.1000/1", alternate_pids=[("pmid", "3")])
    m = lift(r)
    assert MergedPublication.from_dict(m.to_dict()) == m
    assert m.member_sources == [("crossref", "a")]
