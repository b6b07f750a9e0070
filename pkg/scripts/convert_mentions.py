"""Project Softcite / DataStet JSON output onto the osmon mentions JSONL format.

Each input file holds the extraction for one document. The document pid comes from
its `doi` (or `id`) field, else from --pid, else from the file stem. Every mention
becomes one line with the three context probabilities taken from
`mentionContextAttributes.{used,created,shared}.score`; a missing score is 0.

    python scripts/convert_mentions.py softcite/*.json -o mentions.jsonl
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Any, Iterator, Optional

NAME_KEYS = {"software": "software-name", "dataset": "dataset-name"}


def _kind(mention: dict) -> Optional[str]:
    declared = str(mention.get("type") or "").lower()
    if declared in NAME_KEYS:
        return declared
    for kind, key in NAME_KEYS.items():
        if key in mention:
            return kind
    return None


def _score(attrs: dict, name: str) -> float:
    value = (attrs.get(name) or {}).get("score", 0.0)
    return min(max(float(value), 0.0), 1.0)


def project(doc: dict[str, Any], pid: str) -> Iterator[dict[str, Any]]:
    for m in doc.get("mentions") or []:
        kind = _kind(m)
        if kind is None:
            continue
        name = m.get(NAME_KEYS[kind]) or {}
        attrs = m.get("mentionContextAttributes") or {}
        yield {
            "document_pid": pid,
            "object_kind": kind,
            "mention_text": name.get("normalizedForm") or name.get("rawForm") or "",
            "p_used": _score(attrs, "used"),
            "p_created": _score(attrs, "created"),
            "p_shared": _score(attrs, "shared"),
        }


def main(argv: Optional[list[str]] = None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("inputs", nargs="+", type=Path)
    ap.add_argument("-o", "--output", type=Path, help="JSONL destination (default: stdout)")
    ap.add_argument("--pid", help="document pid for a single input file")
    args = ap.parse_args(argv)
    if args.pid and len(args.inputs) > 1:
        ap.error("--pid only makes sense with one input file")

    out = open(args.output, "w", encoding="utf-8") if args.output else sys.stdout
    try:
        for path in args.inputs:
            doc = json.loads(path.read_text(encoding="utf-8"))
            pid = doc.get("doi") or doc.get("id") or args.pid or path.stem
            for line in project(doc, pid):
                out.write(json.dumps(line, ensure_ascii=False, sort_keys=True) + "\n")
    finally:
        if out is not sys.stdout:
            out.close()
    return 0


if __name__ == "__main__":
    sys.exit(main())
