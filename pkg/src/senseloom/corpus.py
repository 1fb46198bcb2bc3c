"""Corpus loading, target-word occurrence search, and candidate sampling.

Sentences flow through the pipeline as SentenceRecord objects serialized to
a canonical JSONL schema:

    {"id", "lang", "lemma", "surface_form", "text", "target_span": [start, end], "source"}

Spans are half-open [start, end) offsets in Unicode scalar values, which is
exactly what Python string indices are.
"""

from __future__ import annotations

import json
import random
import unicodedata
from dataclasses import dataclass
from pathlib import Path

from .errors import DataError, ValidationError

DEFAULT_MIN_TOKENS = 4
DEFAULT_MAX_TOKENS = 128

# Zero-width (non-)joiners are word-internal in Indic and Perso-Arabic scripts.
_WORD_JOINERS = {"‌", "‍"}


def _is_word_char(ch: str) -> bool:
    if ch in _WORD_JOINERS:
        return True
    cat = unicodedata.category(ch)
    return cat[0] in ("L", "M", "N") or cat == "Pc"


def tokenize(text: str) -> list[tuple[int, int]]:
    """Return [start, end) spans of maximal runs of word characters.

    Word characters are Unicode letters, marks, numbers, connector
    punctuation, and ZWJ/ZWNJ. This stands in for default word-boundary
    segmentation; all target scripts here delimit words this way.
    """
    spans = []
    start = None
    for i, ch in enumerate(text):
        if _is_word_char(ch):
            if start is None:
                start = i
        elif start is not None:
            spans.append((start, i))
            start = None
    if start is not None:
        spans.append((start, len(text)))
    return spans


@dataclass(frozen=True)
class RawSentence:
    """One corpus sentence before any target word has been located."""

    id: str
    text: str
    source: str


@dataclass(frozen=True)
class LemmaSpec:
    """A lemma with the explicit list of inflected forms to search for."""

    lemma: str
    forms: tuple[str, ...]
    lang: str
    gloss_hints: tuple[str, ...] = ()

    def __post_init__(self):
        if not self.forms:
            raise ValidationError(f"lemma {self.lemma!r}: forms list is empty")
        if len(set(self.forms)) != len(self.forms):
            raise ValidationError(f"lemma {self.lemma!r}: duplicate inflected forms")
        if self.lemma not in self.forms:
            raise ValidationError(f"lemma {self.lemma!r} missing from its own forms list")


@dataclass(frozen=True)
class SentenceRecord:
    """A sentence with one located occurrence of a target word."""

    id: str
    lang: str
    lemma: str
    surface_form: str
    text: str
    target_span: tuple[int, int]
    source: str = ""

    def __post_init__(self):
        start, end = self.target_span
        if not (0 <= start < end <= len(self.text)):
            raise ValidationError(
                f"record {self.id!r}: span [{start}, {end}) out of bounds for text of length {len(self.text)}"
            )
        if self.text[start:end] != self.surface_form:
            raise ValidationError(
                f"record {self.id!r}: text[{start}:{end}] = {self.text[start:end]!r} "
                f"does not equal surface form {self.surface_form!r}"
            )

    def to_json(self) -> dict:
        return {
            "id": self.id,
            "lang": self.lang,
            "lemma": self.lemma,
            "surface_form": self.surface_form,
            "text": self.text,
            "target_span": list(self.target_span),
            "source": self.source,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "SentenceRecord":
        try:
            return cls(
                id=obj["id"],
                lang=obj["lang"],
                lemma=obj["lemma"],
                surface_form=obj["surface_form"],
                text=obj["text"],
                target_span=(obj["target_span"][0], obj["target_span"][1]),
                source=obj.get("source", ""),
            )
        except (KeyError, IndexError, TypeError) as exc:
            raise DataError(f"malformed sentence record: {exc!r}") from exc


def _decode_utf8(path: Path) -> str:
    data = path.read_bytes()
    try:
        return data.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise DataError(f"{path}: invalid UTF-8 at byte offset {exc.start}") from exc


def load_sentences(path: str | Path, format: str = "lines", source: str | None = None) -> list[RawSentence]:
    """Load a raw corpus file into RawSentence objects with stable ids.

    format "lines": one sentence per non-empty line, id "<source>:<lineno>".
    format "jsonl": one object {"id"?, "text", "source"?} per line; missing
    ids are assigned the same way. Duplicate texts keep the first occurrence.
    """
    path = Path(path)
    if not path.exists():
        raise DataError(f"corpus file not found: {path}")
    if source is None:
        source = path.stem
    text = _decode_utf8(path)

    sentences: list[RawSentence] = []
    seen_texts: set[str] = set()
    seen_ids: set[str] = set()

    if format in ("lines", "plain-lines"):
        for lineno, line in enumerate(text.splitlines(), start=1):
            line = line.strip()
            if not line:
                continue
            if line in seen_texts:
                continue
            seen_texts.add(line)
            sentences.append(RawSentence(id=f"{source}:{lineno}", text=line, source=source))
    elif format == "jsonl":
        for lineno, line in enumerate(text.splitlines(), start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DataError(f"{path}: malformed JSON on line {lineno}: {exc.msg}") from exc
            if isinstance(obj, dict) and "_meta" in obj and "text" not in obj:
                continue
            if not isinstance(obj, dict) or "text" not in obj:
                raise DataError(f"{path}: line {lineno}: expected an object with a 'text' field")
            sent_text = obj["text"]
            sent_source = obj.get("source") or source
            sent_id = obj.get("id") or f"{sent_source}:{lineno}"
            if sent_text in seen_texts:
                continue
            if sent_id in seen_ids:
                raise DataError(f"{path}: line {lineno}: duplicate sentence id {sent_id!r}")
            seen_texts.add(sent_text)
            seen_ids.add(sent_id)
            sentences.append(RawSentence(id=sent_id, text=sent_text, source=sent_source))
    else:
        raise ValidationError(f"unknown corpus format {format!r} (expected 'lines' or 'jsonl')")
    return sentences


def _fold(s: str) -> str:
    # Per-character lowering keeps offsets stable; full casefold may change length.
    return "".join(ch.lower() for ch in s)


def find_occurrences(
    corpus: list[RawSentence],
    spec: LemmaSpec,
    min_tokens: int = DEFAULT_MIN_TOKENS,
    max_tokens: int = DEFAULT_MAX_TOKENS,
    case_fold: bool = False,
) -> list[SentenceRecord]:
    """Locate whole-token occurrences of any of the lemma's inflected forms.

    Emits one record per occurrence, ordered by corpus order and then by
    position in the sentence. Record ids are "<sentence id>#<k>" with k the
    1-based occurrence index. Sentences whose token count falls outside
    [min_tokens, max_tokens] are skipped.
    """
    forms = set(spec.forms)
    folded_forms = {_fold(f) for f in forms} if case_fold else None

    records: list[SentenceRecord] = []
    for sent in corpus:
        token_spans = tokenize(sent.text)
        if not (min_tokens <= len(token_spans) <= max_tokens):
            continue
        hits = []
        for start, end in token_spans:
            token = sent.text[start:end]
            if case_fold:
                if _fold(token) not in folded_forms:
                    continue
            elif token not in forms:
                continue
            hits.append((start, end, token))
        for k, (start, end, token) in enumerate(hits, start=1):
            records.append(
                SentenceRecord(
                    id=f"{sent.id}#{k}",
                    lang=spec.lang,
                    lemma=spec.lemma,
                    surface_form=token,
                    text=sent.text,
                    target_span=(start, end),
                    source=sent.source,
                )
            )
    return records


def sample_candidates(records: list[SentenceRecord], n: int, seed: int) -> list[SentenceRecord]:
    """Uniform sample without replacement of min(n, len(records)) records.

    Deterministic for a fixed seed; output order is the sampled order.
    """
    if n < 1:
        raise ValidationError(f"sample size must be >= 1, got {n}")
    rng = random.Random(seed)
    k = min(n, len(records))
    return rng.sample(records, k)


def write_sentences_jsonl(records: list[SentenceRecord], path: str | Path, meta: dict | None = None) -> None:
    path = Path(path)
    with open(path, "w", encoding="utf-8") as fh:
        if meta is not None:
            fh.write(json.dumps({"_meta": meta}, ensure_ascii=False) + "\n")
        for rec in records:
            fh.write(json.dumps(rec.to_json(), ensure_ascii=False) + "\n")


def read_sentences_jsonl(path: str | Path) -> list[SentenceRecord]:
    path = Path(path)
    if not path.exists():
        raise DataError(f"sentence file not found: {path}")
    records = []
    for lineno, line in enumerate(_decode_utf8(path).splitlines(), start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise DataError(f"{path}: malformed JSON on line {lineno}: {exc.msg}") from exc
        if "_meta" in obj and "id" not in obj:
            continue
        records.append(SentenceRecord.from_json(obj))
    return records
