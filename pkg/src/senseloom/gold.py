"""Gold sense-annotated sentence records and their JSONL serialization.

A gold record is a canonical sentence record plus the adjudicated sense id;
this is the interchange between the annotation store and the WiC builder.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from .corpus import SentenceRecord, _decode_utf8
from .errors import DataError


@dataclass(frozen=True)
class GoldRecord:
    sentence: SentenceRecord
    sense_id: str
    annotator: str = ""
    provenance: str = "manual"

    def to_json(self) -> dict:
        obj = self.sentence.to_json()
        obj["sense_id"] = self.sense_id
        obj["annotator"] = self.annotator
        obj["provenance"] = self.provenance
        return obj

    @classmethod
    def from_json(cls, obj: dict) -> "GoldRecord":
        if "sense_id" not in obj:
            raise DataError("gold record missing 'sense_id'")
        return cls(
            sentence=SentenceRecord.from_json(obj),
            sense_id=obj["sense_id"],
            annotator=obj.get("annotator", ""),
            provenance=obj.get("provenance", "manual"),
        )


def write_gold_jsonl(records: list[GoldRecord], path: str | Path, meta: dict | None = None) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        if meta is not None:
            fh.write(json.dumps({"_meta": meta}, ensure_ascii=False) + "\n")
        for rec in records:
            fh.write(json.dumps(rec.to_json(), ensure_ascii=False) + "\n")


def read_gold_jsonl(path: str | Path) -> list[GoldRecord]:
    path = Path(path)
    if not path.exists():
        raise DataError(f"gold file not found: {path}")
    out = []
    for lineno, line in enumerate(_decode_utf8(path).splitlines(), start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise DataError(f"{path}: malformed JSON on line {lineno}: {exc.msg}") from exc
        if "_meta" in obj and "id" not in obj:
            continue
        out.append(GoldRecord.from_json(obj))
    return out
