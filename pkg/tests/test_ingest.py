import json

import pytest

from osmon.ingest import (
    IngestError,
    PerimeterRule,
    SourceAdapter,
    apply_perimeter,
    build_adapter,
    map_object,
    read_source_file,
    resolve_path,
)
from osmon.records import Genre, Source

CROSSREF_ITEM = {
    "DOI": "10.5281/ZENODO.8042997",
    "title": ["Sharing  research data"],
    "author": [
        {"family": "Doe", "given": "Jane", "ORCID": "https://orcid.org/0000-0002-1825-0097",
         "affiliation": [{"name": "CNRS, Paris, France"}]},
        {"family": "Roe", "ORCID": "0000-0002-1825-0098", "affiliation": []},
    ],
    "ISSN": ["0378-5955", "bad"],
    "container-title": ["Hearing Research"],
    "issued": {"date-parts": [[2021, 3, 2]]},
    "type": "journal-article",
    "relation": {"has-preprint": [{"id-type": "doi", "id": "https://doi.org/10.1101/ABC"}]},
    "license": [{"URL": "https://creativecommons.org/licenses/by/4.0/"}],
    "subject": ["Acoustics", "acoustics"],
}


def test_crossref_mapping():
    rec = map_object(CROSSREF_ITEM, build_adapter("crossref"))
    assert rec.doi == "10.5281/zenodo.8042997"
    assert rec.source_id == "10.5281/ZENODO.8042997"
    assert rec.title == "Sharing  research data"
    assert [a.family for a in rec.authors] == ["Doe", "Roe"]
    assert rec.authors[0].orcid == "0000-0002-1825-0097"
    assert rec.authors[1].orcid is None  # bad check digit is dropped, the author kept
    assert rec.raw_affiliations == ["CNRS, Paris, France"]
    assert rec.journal_issns == ["03785955"]
    assert rec.year == 2021 and rec.genre is Genre.JOURNAL_ARTICLE
    assert rec.related_identifiers == [("HasPreprint", "doi", "10.1101/abc")]
    assert rec.keywords == ["Acoustics"]


def test_pubmed_mapping_adds_pmid():
    item = {"pmid": "123", "title": "T", "authors": [{"lastName": "Doe", "foreName": "J"}],
            "year": "2019", "publication_types": ["Journal Article"]}
    rec = map_object(item, build_adapter("pubmed"))
    assert rec.doi is None and rec.alternate_pids == [("pmid", "123")]
    assert rec.pid() == ("pmid", "123")


def test_repository_relation_and_string_authors():
    item = {
        "id": "hal-1", "pids": ["hal:hal-1"], "title": "Pre", "authors": ["Doe, Jane", "John Roe"],
        "type": "undefined", "year": "2020-05",
        "relatedIdentifiers": [{"relationType": "IsPreprintOf", "relatedIdentifierType": "DOI",
                                "relatedIdentifier": "10.1000/X"}],
    }
    rec = map_object(item, build_adapter("repository"))
    assert rec.genre is Genre.PREPRINT
    assert [(a.family, a.given) for a in rec.authors] == [("Doe", "Jane"), ("Roe", "John")]
    assert rec.related_identifiers == [("IsPreprintOf", "doi", "10.1000/x")]
    assert rec.year == 2020


def test_resolve_path():
    obj = {"a": [{"b": [1, 2]}, {"b": [3]}], "c": {"d": "x"}}
    assert resolve_path(obj, "a.*.b.*") == [1, 2, 3]
    assert resolve_path(obj, "a.1.b.0") == [3]
    assert resolve_path(obj, "c.d") == ["x"]
    assert resolve_path(obj, "missing.x") == []


def test_adapter_validation():
    with pytest.raises(IngestError):
        SourceAdapter(Source.OTHER, {"doi": ["d"]})
    with pytest.raises(IngestError):
        SourceAdapter(Source.OTHER, {"title": ["t"]})
    with pytest.raises(IngestError):
        SourceAdapter(Source.OTHER, {"title": ["t"], "doi": ["d"], "bogus": ["x"]})
    SourceAdapter(Source.OTHER, {"title": ["t"], "pid:hal": ["id"]})


def test_build_adapter_overrides():
    ad = build_adapter("institution", field_map={"title": "name"}, genre_map={"paper": "journal-article"})
    assert ad.field_map["title"] == ["name"]
    assert ad.map_genre("Paper") is Genre.JOURNAL_ARTICLE
    assert ad.map_genre("nonsense") is Genre.OTHER
    with pytest.raises(IngestError):
        build_adapter("other", base="nope")


def test_read_source_file_rejects(tmp_path):
    path = tmp_path / "src.jsonl"
    lines = [
        json.dumps(CROSSREF_ITEM),
        "",
        "{not json",
        json.dumps([1, 2]),
        json.dumps({"DOI": "10.1/x", "title": [""]}),
        json.dumps({"DOI": "10.1/y", "title": ["ok"], "issued": {"date-parts": [[1200]]}}),
    ]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    before = path.read_bytes()
    recs, rejects = read_source_file(path, build_adapter("crossref"))
    assert len(recs) == 1
    assert [r.line for r in rejects] == [2, 3, 4, 5, 6]
    assert "title" in rejects[3].reason and "year" in rejects[4].reason
    assert path.read_bytes() == before


def test_unreadable_file_raises(tmp_path):
    with pytest.raises(IngestError):
        read_source_file(tmp_path / "missing.jsonl", build_adapter("crossref"))
    bad = tmp_path / "latin1.jsonl"
    bad.write_bytes('{"title": "caf\xe9"}\n'.encode("latin-1"))
    with pytest.raises(IngestError):
        read_source_file(bad, build_adapter("crossref"))


def test_perimeter():
    rule = PerimeterRule(frozenset({Genre.JOURNAL_ARTICLE}), 2019, 2020)
    recs = [map_object({"DOI": f"10.1000/{i}", "title": ["t"], "type": t, "issued": {"date-parts": [[y]]}},
                       build_adapter("crossref"))
            for i, (t, y) in enumerate([("journal-article", 2019), ("journal-article", 2021),
                                        ("book-chapter", 2020), ("journal-article", None)])]
    kept, excluded = apply_perimeter(recs, rule)
    assert [r.doi for r in kept] == ["10.1000/0"]
    assert len(excluded) == 3
    with pytest.raises(ValueError):
        PerimeterRule(frozenset(), 2021, 2020)
