import random
from decimal import Decimal
from dataclasses import dataclass, field

import pytest
from hypothesis import given, settings, strategies as st

from osmon.disciplines import (
    UNCLASSIFIED,
    Basis,
    Taxonomy,
    TaxonomyError,
    classify,
    classify_corpus,
    keyword_scores,
)

from conftest import FIXTURES

TAX = Taxonomy.load(FIXTURES / "pipeline" / "taxonomy.csv")


@dataclass
class Pub:
    title: str
    keywords: list = field(default_factory=list)
    journal_issns: list = field(default_factory=list)
    discipline: object = None


def P(title="", keywords=(), issns=()):
    return Pub(title, list(keywords), list(issns))


def small():
    return Taxonomy(
        [("cat_a", "A"), ("cat_b", "B"), ("cat_c", "C")],
        {"11111111": "cat_c", "22222222": "cat_b"},
        {("alpha", "cat_a"): Decimal(2), ("beta", "cat_b"): Decimal(2), ("gamma ray", "cat_c"): Decimal("0.5")},
    )


def test_default_has_ten_categories():
    assert len(Taxonomy.default().category_ids) == 10


def test_issn_lookup_first_wins():
    assert classify(P("alpha", issns=["99999999", "22222222", "11111111"]), small()) == ("cat_b", Basis.ISSN)


def test_single_category_keywords():
    assert classify(P("An alpha study"), small()) == ("cat_a", Basis.KEYWORDS)


def test_tie_breaks_lexicographically():
    assert keyword_scores("alpha beta", small()) == {"cat_a": 2, "cat_b": 2}
    assert classify(P("beta alpha"), small()) == ("cat_a", Basis.KEYWORDS)


def test_token_boundary_and_multiword():
    assert classify(P("alphabet gamma"), small())[0] == UNCLASSIFIED
    assert classify(P("Gamma-ray bursts"), small())[0] == "cat_c"
    assert classify(P("", keywords=["Beta"]), small())[0] == "cat_b"


def test_presence_not_frequency():
    assert keyword_scores("alpha alpha alpha beta", small()) == {"cat_a": 2, "cat_b": 2}


def test_classify_corpus_distribution():
    assert classify_corpus([], small()) == ([], {})
    labels = ["cat_a", "cat_b", "cat_c", UNCLASSIFIED, "cat_a", "cat_b", "cat_b", "cat_c", UNCLASSIFIED, "cat_a"]
    titles = {"cat_a": "alpha", "cat_b": "beta", "cat_c": "gamma ray", UNCLASSIFIED: "nothing"}
    corpus = [P(titles[lab]) for lab in labels]
    out, dist = classify_corpus(corpus, small())
    assert dist == {"cat_a": 3, "cat_b": 3, "cat_c": 2, UNCLASSIFIED: 2}
    assert [p.discipline for p in out] == [None if lab == UNCLASSIFIED else lab for lab in labels]
    again, dist2 = classify_corpus(out, small())
    assert [p.discipline for p in again] == [p.discipline for p in out] and dist2 == dist


KEYWORDS = sorted({" ".join(kw) for kw in TAX._by_keyword})


@settings(max_examples=100)
@given(st.lists(st.sampled_from(KEYWORDS), max_size=6), st.sampled_from(["0.1", "7.3", "0.001", "1000"]))
def test_argmax_invariant_under_scaling(words, lam):
    pub = P(" ".join(words))
    assert classify(pub, TAX.scaled(lam)) == classify(pub, TAX)


@settings(max_examples=100)
@given(st.lists(st.sampled_from(KEYWORDS), min_size=1, max_size=6), st.sampled_from(sorted(TAX.issn_map)))
def test_issn_preempts_keywords(words, issn):
    assert classify(P(" ".join(words), issns=[issn]), TAX) == (TAX.issn_map[issn], Basis.ISSN)


def test_taxonomy_validation(tmp_path):
    with pytest.raises(TaxonomyError):
        Taxonomy([("a", "A"), ("a", "B")])
    with pytest.raises(TaxonomyError):
        Taxonomy([("a", "A")], keyword_weights={("x", "a"): Decimal(0)})
    with pytest.raises(TaxonomyError):
        Taxonomy([("a", "A")], issn_map={"11111111": "b"})
    with pytest.raises(TaxonomyError):
        Taxonomy([(UNCLASSIFIED, "none")])
    p = tmp_path / "t.csv"
    p.write_text("section,key,category_id,value\ncategory,A,a,\nkeyword,x,a,heavy\n")
    with pytest.raises(TaxonomyError):
        Taxonomy.load(p)
