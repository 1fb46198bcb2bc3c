"""Evaluation harness for WiC pairs scored by an external bi-encoder.

The embedder is out of scope here: it consumes marked-up sentences
("<t>word</t>") and returns one cosine distance per pair. This module tunes
the decision threshold on dev distances (rule: distance <= t means same
sense) and reports accuracy on test.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

from .errors import DataError, ValidationError

TARGET_OPEN = "<t>"
TARGET_CLOSE = "</t>"

_DISTANCE_SLACK = 1e-9


def mark_target(text: str, span: tuple[int, int]) -> str:
    """Wrap the target span in <t>...</t>; the rest of the text is untouched."""
    start, end = span
    if not (0 <= start < end <= len(text)):
        raise ValidationError(f"span [{start}, {end}) out of bounds for text of length {len(text)}")
    return text[:start] + TARGET_OPEN + text[start:end] + TARGET_CLOSE + text[end:]


@dataclass(frozen=True)
class ScoredPair:
    pair_id: str
    distance: float
    label: int

    def __post_init__(self):
        if not math.isfinite(self.distance):
            raise ValidationError(f"pair {self.pair_id!r}: distance is not finite")
        if not (-_DISTANCE_SLACK <= self.distance <= 2.0 + _DISTANCE_SLACK):
            raise ValidationError(
                f"pair {self.pair_id!r}: distance {self.distance} outside [0, 2]"
            )
        if self.label not in (0, 1):
            raise ValidationError(f"pair {self.pair_id!r}: label must be 0 or 1")


@dataclass(frozen=True)
class Threshold:
    value: float  # may be +-inf (classify everything as one label)
    tuned_on: str
    dev_accuracy: float


def _accuracy(pairs: list[ScoredPair], t: float) -> float:
    hits = sum(1 for p in pairs if (p.distance <= t) == (p.label == 1))
    return hits / len(pairs)


def tune_threshold(dev: list[ScoredPair], tuned_on: str = "dev") -> Threshold:
    """Pick the cut point maximizing dev accuracy under "distance <= t -> same sense".

    Candidates are the midpoints between adjacent distinct distances plus
    -inf/+inf sentinels, which together realize every possible labeling, so
    the returned threshold is exhaustively optimal. Ties go to the smallest t.
    """
    if not dev:
        raise ValidationError("dev set is empty")
    labels = {p.label for p in dev}
    if len(labels) < 2:
        raise ValidationError("threshold is unidentifiable: dev set has a single class")

    ordered = sorted(dev, key=lambda p: p.distance)
    n = len(ordered)
    total_ones = sum(p.label for p in ordered)

    # accuracy at a cut after position i (0 = predict nothing as label 1):
    # ones seen so far are correct, zeros beyond the cut are correct
    best_t = -math.inf
    best_acc = (n - total_ones) / n
    ones_below = 0
    for i, p in enumerate(ordered):
        ones_below += p.label
        if i + 1 < n and ordered[i + 1].distance == p.distance:
            continue  # cuts fall only between distinct distances
        acc = (ones_below + (n - total_ones) - (i + 1 - ones_below)) / n
        if acc > best_acc:
            best_acc = acc
            if i + 1 < n:
                best_t = (p.distance + ordered[i + 1].distance) / 2.0
            else:
                best_t = math.inf
    return Threshold(value=best_t, tuned_on=tuned_on, dev_accuracy=best_acc)


def evaluate(test: list[ScoredPair], t: Threshold) -> float:
    if not test:
        raise ValidationError("test set is empty")
    return _accuracy(test, t.value)


def render_accuracy(acc: float) -> str:
    return f"{acc * 100:.1f}"


def join_scores(
    labels_by_pair_id: dict[str, int], scores: list[tuple[str, float]]
) -> list[ScoredPair]:
    """Join externally produced distances onto labeled pairs by pair id."""
    seen = set()
    out = []
    for pair_id, distance in scores:
        if pair_id not in labels_by_pair_id:
            raise ValidationError(f"scored pair {pair_id!r} does not match any labeled pair")
        if pair_id in seen:
            raise ValidationError(f"duplicate score for pair {pair_id!r}")
        seen.add(pair_id)
        out.append(ScoredPair(pair_id=pair_id, distance=distance, label=labels_by_pair_id[pair_id]))
    missing = sorted(set(labels_by_pair_id) - seen)
    if missing:
        raise ValidationError(f"pairs without scores: {missing[:5]} ({len(missing)} total)")
    return out


def read_scores_jsonl(path: str | Path) -> list[tuple[str, float]]:
    path = Path(path)
    if not path.exists():
        raise DataError(f"scores file not found: {path}")
    out = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DataError(f"{path}: malformed JSON on line {lineno}: {exc.msg}") from exc
            if "_meta" in obj and "pair_id" not in obj:
                continue
            try:
                out.append((obj["pair_id"], float(obj["distance"])))
            except (KeyError, TypeError, ValueError) as exc:
                raise DataError(f"{path}: line {lineno}: expected pair_id and distance") from exc
    return out


def report_json(t: Threshold, test_accuracy: float | None, n_dev: int, n_test: int) -> dict:
    return {
        "threshold": t.value,
        "dev_accuracy": t.dev_accuracy,
        "test_accuracy": test_accuracy,
        "n_dev": n_dev,
        "n_test": n_test,
    }
