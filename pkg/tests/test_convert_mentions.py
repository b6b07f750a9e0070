import importlib.util
import json
from pathlib import Path

from osmon.mentions import parse_mentions_file

SCRIPT = Path(__file__).resolve().parents[1] / "scripts" / "convert_mentions.py"
spec = importlib.util.spec_from_file_location("convert_mentions", SCRIPT)
convert = importlib.util.module_from_spec(spec)
spec.loader.exec_module(convert)

DOC = {
    "doi": "10.1234/ABC",
    "mentions": [
        {"type": "software", "software-name": {"rawForm": "SciPy", "normalizedForm": "scipy"},
         "mentionContextAttributes": {"used": {"value": True, "score": 0.93}, "created": {"score": 0.02},
                                      "shared": {"score": 0.4}}},
        {"dataset-name": {"rawForm": "ERA5"}, "mentionContextAttributes": {"used": {"score": 1.4}}},
        {"type": "url", "url": {"rawForm": "http://x"}},
    ],
}


def test_projection_round_trips_through_parser(tmp_path):
    src = tmp_path / "doc.json"
    src.write_text(json.dumps(DOC))
    out = tmp_path / "mentions.jsonl"
    assert convert.main([str(src), "-o", str(out)]) == 0
    records, rejects = parse_mentions_file(out)
    assert rejects == []
    assert [(r.document_pid, r.object_kind.value, r.mention_text) for r in records] == [
        ("10.1234/abc", "software", "scipy"), ("10.1234/abc", "dataset", "ERA5")]
    assert (records[0].p_used, records[0].p_created, records[0].p_shared) == (0.93, 0.02, 0.4)
    assert (records[1].p_used, records[1].p_shared) == (1.0, 0.0)


def test_pid_fallback(tmp_path):
    src = tmp_path / "hal-01234.json"
    src.write_text(json.dumps({"mentions": DOC["mentions"][:1]}))
    assert [m["document_pid"] for m in convert.project(json.loads(src.read_text()), "hal-01234")] == ["hal-01234"]
    out = tmp_path / "m.jsonl"
    convert.main([str(src), "-o", str(out)])
    assert json.loads(out.read_text())["document_pid"] == "hal-01234"
