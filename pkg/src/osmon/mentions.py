"""Dataset/software mention funnel: mention probabilities -> document flags -> sharing rate."""

from __future__ import annotations

import json
import math
from collections import defaultdict
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from pathlib import Path
from typing import Any, Iterable, Iterator, Optional, Union

from .ingest import Reject
from .records import normalize_doi

DEFAULT_THRESHOLD = 0.5


class ObjectKind(str, Enum):
    DATASET = "dataset"
    SOFTWARE = "software"


class DenominatorMode(str, Enum):
    OR = "or"  # documents that use or create
    AND = "and"  # documents that use and create


@dataclass(frozen=True)
class MentionRecord:
    document_pid: str
    object_kind: ObjectKind
    mention_text: str
    p_used: float
    p_created: float
    p_shared: float


def canonical_document_pid(raw: str) -> str:
    """DOIs are canonicalized so they join against corpus pids; anything else is kept verbatim."""
    return normalize_doi(raw) or raw.strip()


def _probability(obj: dict[str, Any], key: str) -> float:
    v = obj.get(key)
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ValueError(f"{key} must be a number")
    if math.isnan(v) or not 0 <= v <= 1:
        raise ValueError(f"{key}={v} outside [0, 1]")
    return float(v)


def parse_mention(obj: Any) -> MentionRecord:
    if not isinstance(obj, dict):
        raise ValueError("line is not a JSON object")
    pid = obj.get("document_pid")
    if not isinstance(pid, str) or not pid.strip():
        raise ValueError("document_pid is required")
    try:
        kind = ObjectKind(obj.get("object_kind"))
    except ValueError:
        raise ValueError(f"object_kind must be dataset or software, got {obj.get('object_kind')!r}") from None
    text = obj.get("mention_text")
    if not isinstance(text, str):
        raise ValueError("mention_text must be a string")
    return MentionRecord(
        canonical_document_pid(pid),
        kind,
        text,
        _probability(obj, "p_used"),
        _probability(obj, "p_created"),
        _probability(obj, "p_shared"),
    )


def iter_mentions_file(path: Union[str, Path]) -> Iterator[Union[MentionRecord, Reject]]:
    """Out-of-range probabilities reject the line; they are never clamped."""
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                yield Reject(lineno, "empty line")
                continue
            try:
                yield parse_mention(json.loads(line))
            except json.JSONDecodeError as exc:
                yield Reject(lineno, f"malformed JSON: {exc.msg}")
            except ValueError as exc:
                yield Reject(lineno, str(exc))


def parse_mentions_file(path: Union[str, Path]) -> tuple[list[MentionRecord], list[Reject]]:
    records: list[MentionRecord] = []
    rejects: list[Reject] = []
    for item in iter_mentions_file(path):
        (rejects if isinstance(item, Reject) else records).append(item)
    return records, rejects


@dataclass(frozen=True)
class KindFlags:
    uses: bool = False
    creates: bool = False
    shares: bool = False
    mention_count: int = 0


@dataclass(frozen=True)
class DocumentMentionIndicators:
    document_pid: str
    flags: dict[ObjectKind, KindFlags] = field(default_factory=dict)

    def of(self, kind: ObjectKind) -> KindFlags:
        return self.flags.get(kind, KindFlags())

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {"document_pid": self.document_pid}
        for kind in ObjectKind:
            f = self.of(kind)
            out[kind.value] = {
                "uses": f.uses,
                "creates": f.creates,
                "shares": f.shares,
                "mention_count": f.mention_count,
            }
        return out

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "DocumentMentionIndicators":
        flags = {
            kind: KindFlags(bool(d[kind.value]["uses"]), bool(d[kind.value]["creates"]),
                            bool(d[kind.value]["shares"]), int(d[kind.value]["mention_count"]))
            for kind in ObjectKind
            if kind.value in d
        }
        return cls(d["document_pid"], flags)


def document_indicators(
    document_pid: str, mentions: Iterable[MentionRecord], threshold: float = DEFAULT_THRESHOLD
) -> DocumentMentionIndicators:
    if not 0 < threshold < 1:
        raise ValueError("threshold must be in (0, 1)")
    acc: dict[ObjectKind, list[int]] = {k: [0, 0, 0, 0] for k in ObjectKind}
    for m in mentions:
        if m.document_pid != document_pid:
            raise ValueError(f"mention for {m.document_pid} passed with document {document_pid}")
        a = acc[m.object_kind]
        a[0] |= m.p_used >= threshold
        a[1] |= m.p_created >= threshold
        a[2] |= m.p_shared >= threshold
        a[3] += 1
    return DocumentMentionIndicators(
        document_pid, {k: KindFlags(bool(a[0]), bool(a[1]), bool(a[2]), a[3]) for k, a in acc.items()}
    )


@dataclass(frozen=True)
class CorpusIndicators:
    indicators: list[DocumentMentionIndicators]
    dropped_mentions: int


def corpus_indicators(
    corpus_pids: Iterable[str], mentions: Iterable[MentionRecord], threshold: float = DEFAULT_THRESHOLD
) -> CorpusIndicators:
    """Indicators for every corpus document; mentions of documents outside it are dropped and counted."""
    pids = sorted(set(corpus_pids))
    wanted = set(pids)
    grouped: dict[str, list[MentionRecord]] = defaultdict(list)
    dropped = 0
    for m in mentions:
        if m.document_pid in wanted:
            grouped[m.document_pid].append(m)
        else:
            dropped += 1
    return CorpusIndicators([document_indicators(p, grouped.get(p, ()), threshold) for p in pids], dropped)


@dataclass(frozen=True)
class FunnelKPI:
    object_kind: ObjectKind
    denominator: int
    numerator: int
    mode: DenominatorMode = DenominatorMode.OR

    @property
    def rate(self) -> Optional[Fraction]:
        return Fraction(self.numerator, self.denominator) if self.denominator else None


def funnel_kpi(
    indicators: Iterable[DocumentMentionIndicators],
    object_kind: Union[str, ObjectKind],
    mode: Union[str, DenominatorMode] = DenominatorMode.OR,
) -> FunnelKPI:
    kind, mode = ObjectKind(object_kind), DenominatorMode(mode)
    den = num = 0
    for ind in indicators:
        f = ind.of(kind)
        engaged = (f.uses or f.creates) if mode is DenominatorMode.OR else (f.uses and f.creates)
        if engaged:
            den += 1
            num += f.shares
    return FunnelKPI(kind, den, num, mode)
