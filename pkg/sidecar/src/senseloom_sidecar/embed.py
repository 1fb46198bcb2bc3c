"""Produce embedding files and scored pair distances through the core's formats."""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from senseloom.corpus import read_sentences_jsonl
from senseloom.embedstore import EmbeddingMatrix, write_embeddings
from senseloom.errors import DataError, ValidationError
from senseloom.wiceval import TARGET_OPEN, mark_target


def embed_occurrences(
    sentences_path: str | Path,
    model_id: str,
    out_path: str | Path,
    layer_policy: str = "last",
    backend=None,
) -> EmbeddingMatrix:
    """One vector per sentence record, ids preserved in input order."""
    from .backends import load_backend

    records = read_sentences_jsonl(sentences_path)
    if not records:
        raise ValidationError(f"no sentence records in {sentences_path}")
    lemmas = {rec.lemma for rec in records}
    if len(lemmas) != 1:
        raise ValidationError(f"embedding files are per-lemma; input mixes {sorted(lemmas)}")

    backend = backend or load_backend(model_id, layer_policy=layer_policy)
    vectors = backend.encode(
        [(rec.text, rec.target_span) for rec in records], record_ids=[rec.id for rec in records]
    )
    matrix = EmbeddingMatrix(
        lemma=lemmas.pop(),
        model_id=backend.model_id,
        ids=[rec.id for rec in records],
        data=vectors,
    )
    write_embeddings(matrix, out_path)
    return matrix


def _marked_item(text: str, span: tuple[int, int]) -> tuple[str, tuple[int, int]]:
    marked = mark_target(text, span)
    shift = len(TARGET_OPEN)
    return marked, (span[0] + shift, span[1] + shift)


def score_pairs(
    pairs_path: str | Path,
    model_id: str,
    out_path: str | Path,
    layer_policy: str = "last",
    backend=None,
) -> int:
    """Cosine distance in [0, 2] per pair, written as {"pair_id", "distance"} JSONL."""
    from .backends import load_backend

    pairs_path = Path(pairs_path)
    if not pairs_path.exists():
        raise DataError(f"pairs file not found: {pairs_path}")
    rows = []
    with open(pairs_path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DataError(f"{pairs_path}: malformed JSON on line {lineno}: {exc.msg}") from exc
            if "_meta" in obj and "pair_id" not in obj:
                continue
            try:
                rows.append(
                    (
                        obj["pair_id"],
                        (obj["sentence1"], (obj["span1"][0], obj["span1"][1])),
                        (obj["sentence2"], (obj["span2"][0], obj["span2"][1])),
                    )
                )
            except (KeyError, IndexError) as exc:
                raise DataError(f"{pairs_path}: line {lineno}: missing pair field {exc}") from exc

    backend = backend or load_backend(model_id, layer_policy=layer_policy)
    items = []
    for _, (t1, s1), (t2, s2) in rows:
        items.append(_marked_item(t1, s1))
        items.append(_marked_item(t2, s2))
    vectors = backend.encode(items).astype(np.float64)
    norms = np.linalg.norm(vectors, axis=1, keepdims=True)
    norms[norms == 0] = 1.0
    vectors /= norms

    with open(out_path, "w", encoding="utf-8") as fh:
        for i, (pair_id, _, _) in enumerate(rows):
            a, b = vectors[2 * i], vectors[2 * i + 1]
            distance = float(np.clip(1.0 - a @ b, 0.0, 2.0))
            fh.write(json.dumps({"pair_id": pair_id, "distance": distance}) + "\n")
    return len(rows)
