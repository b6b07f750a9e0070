import json
import random

import pytest
from hypothesis import given, settings, strategies as st

from osmon.mentions import (
    DenominatorMode,
    DocumentMentionIndicators,
    KindFlags,
    MentionRecord,
    ObjectKind,
    corpus_indicators,
    document_indicators,
    funnel_kpi,
    parse_mention,
    parse_mentions_file,
)
from synth import funnel_oracle, mentions_fixture

DS, SW = ObjectKind.DATASET, ObjectKind.SOFTWARE


def M(pid="10.1000/d", kind=DS, u=0.0, c=0.0, s=0.0):
    return MentionRecord(pid, kind, "x", u, c, s)


def line(**kw):
    obj = {"document_pid": "10.1000/d", "object_kind": "dataset", "mention_text": "m",
           "p_used": 0.1, "p_created": 0.1, "p_shared": 0.1}
    obj.update(kw)
    return json.dumps(obj)


def test_parse_valid_and_canonical_pid():
    m = parse_mention(json.loads(line(p_used=0.9, document_pid="https://doi.org/10.1000/D")))
    assert m.p_used == 0.9 and m.document_pid == "10.1000/d"


@pytest.mark.parametrize("bad", [
    {"p_shared": 1.7}, {"p_used": -0.1}, {"p_created": "0.5"}, {"p_used": True},
    {"object_kind": "model"}, {"document_pid": ""}, {"mention_text": 3},
])
def test_parse_rejects(bad):
    with pytest.raises(ValueError):
        parse_mention(json.loads(line(**bad)))


def test_parse_file_counts(tmp_path):
    rng = random.Random(5)
    bad_at = set(rng.sample(range(100), 3))
    lines = [("{oops" if i % 2 else line(p_shared=1.7)) if i in bad_at else line(p_used=rng.random())
             for i in range(100)]
    p = tmp_path / "m.jsonl"
    p.write_text("\n".join(lines) + "\n")
    recs, rejects = parse_mentions_file(p)
    assert len(recs) == 97 and sorted(r.line for r in rejects) == sorted(i + 1 for i in bad_at)


def test_document_indicators_examples():
    empty = document_indicators("10.1000/d", [])
    assert empty.of(DS) == KindFlags() and empty.of(SW) == KindFlags()
    one = document_indicators("10.1000/d", [M(s=0.9)], 0.5)
    assert one.of(DS).shares and not one.of(DS).uses and one.of(DS).mention_count == 1


def test_six_mention_fixture():
    ms = [M(u=0.5), M(c=0.49), M(kind=SW, s=0.51), M(kind=SW, u=0.2, c=0.8), M(s=0.1), M(kind=SW)]
    ind = document_indicators("10.1000/d", ms, 0.5)
    for kind in ObjectKind:
        sub = [m for m in ms if m.object_kind is kind]
        want = KindFlags(any(m.p_used >= 0.5 for m in sub), any(m.p_created >= 0.5 for m in sub),
                         any(m.p_shared >= 0.5 for m in sub), len(sub))
        assert ind.of(kind) == want


def test_document_indicators_validation():
    with pytest.raises(ValueError):
        document_indicators("a", [], 1.0)
    with pytest.raises(ValueError):
        document_indicators("a", [M("b")])


def _ind(pid, u, c, s):
    return DocumentMentionIndicators(pid, {DS: KindFlags(u, c, s, 1)})


def test_funnel_examples():
    docs = [_ind("a", 1, 0, 1), _ind("b", 0, 1, 1), _ind("c", 1, 1, 1), _ind("d", 1, 0, 0),
            _ind("e", 0, 1, 0), _ind("f", 1, 1, 0), _ind("g", 0, 0, 1), _ind("h", 0, 0, 0),
            _ind("i", 0, 0, 0), _ind("j", 0, 0, 1)]
    k = funnel_kpi(docs, DS)
    assert (k.numerator, k.denominator, k.rate) == (3, 6, 0.5)
    assert funnel_kpi([_ind("x", 0, 0, 1)], DS).rate is None
    assert funnel_kpi([_ind("x", 1, 0, 1), _ind("y", 1, 1, 1)], DS).rate == 1
    assert funnel_kpi(docs, DS, "and").denominator == 2


def test_corpus_indicators_drops_outside():
    res = corpus_indicators(["a", "b"], [M("a", u=0.9), M("zzz", u=0.9), M("zzz")])
    assert res.dropped_mentions == 2
    assert [i.document_pid for i in res.indicators] == ["a", "b"]


@pytest.mark.parametrize("tau", [0.3, 0.5])
@pytest.mark.parametrize("mode", ["or", "and"])
def test_funnel_bruteforce_1000(tau, mode):
    docs, mentions = mentions_fixture(random.Random(1000))
    ind = corpus_indicators(docs, mentions, tau).indicators
    for kind in ObjectKind:
        k = funnel_kpi(ind, kind, mode)
        assert (k.numerator, k.denominator) == funnel_oracle(docs, mentions, kind, tau, mode)


@settings(max_examples=20, deadline=None)
@given(st.floats(0.01, 0.99), st.floats(0.01, 0.99))
def test_threshold_monotone(t1, t2):
    lo, hi = sorted((t1, t2))
    docs, mentions = mentions_fixture(random.Random(7), 200)
    a = {i.document_pid: i for i in corpus_indicators(docs, mentions, lo).indicators}
    b = {i.document_pid: i for i in corpus_indicators(docs, mentions, hi).indicators}
    for pid in docs:
        for kind in ObjectKind:
            x, y = a[pid].of(kind), b[pid].of(kind)
            assert (y.uses <= x.uses) and (y.creates <= x.creates) and (y.shares <= x.shares)


@settings(max_examples=50)
@given(st.lists(st.tuples(st.booleans(), st.booleans(), st.booleans()), max_size=30))
def test_adding_sharing_user_is_monotone(flags):
    docs = [_ind(str(i), *f) for i, f in enumerate(flags)]
    before = funnel_kpi(docs, DS)
    after = funnel_kpi(docs + [_ind("new", True, False, True)], DS)
    assert after.numerator >= before.numerator and after.denominator >= before.denominator
    assert before.numerator <= before.denominator


def test_indicator_roundtrip():
    ind = document_indicators("p", [M("p", u=0.9), M("p", kind=SW, s=0.7)])
    assert DocumentMentionIndicators.from_dict(ind.to_dict()) == ind


def test_mode_enum():
    assert DenominatorMode("and") is DenominatorMode.AND
