"""Turn a gold sense-annotated corpus into balanced WiC train/dev/test pairs.

The pipeline is: split words 70/15/15, pick 30% of the train words to appear
in all three splits, move a sense-stratified 25% of those words' sentences
into dev/test, then pair sentences within each split (cap 16 pairs per
sentence, labels balanced by dropping excess majority pairs).

All fractional counts are resolved by largest-remainder rounding over exact
rationals, so results are deterministic and auditable.
"""

from __future__ import annotations

import heapq
import json
import math
import random
import warnings
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

from .errors import ValidationError
from .gold import GoldRecord

SPLITS = ("train", "dev", "test")
SPLIT_SHARES = {"train": Fraction(70, 100), "dev": Fraction(15, 100), "test": Fraction(15, 100)}
SHARED_TRAIN_SHARE = Fraction(30, 100)
MOVED_SENTENCE_SHARE = Fraction(25, 100)
DEFAULT_MAX_PAIRS_PER_SENTENCE = 16


def _round_half_up(x: Fraction) -> int:
    return math.floor(x + Fraction(1, 2))


def largest_remainder(total: int, shares: list[Fraction]) -> list[int]:
    """Apportion `total` integer seats to fractional shares.

    Floors first, then hands remaining seats to the largest fractional
    parts; ties go to the earlier position.
    """
    quotas = [share * total for share in shares]
    counts = [math.floor(q) for q in quotas]
    remaining = total - sum(counts)
    order = sorted(range(len(shares)), key=lambda i: (-(quotas[i] - counts[i]), i))
    for i in order[:remaining]:
        counts[i] += 1
    return counts


@dataclass
class WordSplit:
    train_words: list[str]
    dev_words: list[str]
    test_words: list[str]
    shared_words: list[str]  # subset of train_words present in all three splits

    def split_of(self, lemma: str) -> str:
        if lemma in self._train_set:
            return "train"
        if lemma in self._dev_set:
            return "dev"
        if lemma in self._test_set:
            return "test"
        raise ValidationError(f"lemma {lemma!r} is not in the word split")

    def __post_init__(self):
        self._train_set = set(self.train_words)
        self._dev_set = set(self.dev_words)
        self._test_set = set(self.test_words)
        self._shared_set = set(self.shared_words)
        if not self._shared_set <= self._train_set:
            raise ValidationError("shared words must be a subset of train words")
        if (
            self._train_set & self._dev_set
            or self._train_set & self._test_set
            or self._dev_set & self._test_set
        ):
            raise ValidationError("word splits must be disjoint")

    def is_shared(self, lemma: str) -> bool:
        return lemma in self._shared_set


def split_words(lemmas: list[str], seed: int) -> WordSplit:
    """Allocate lemmas 70/15/15 and pick the 30% of train words shared by all splits.

    Dev and test are each guaranteed at least one word, which is why fewer
    than 3 lemmas is an error.
    """
    if len(set(lemmas)) != len(lemmas):
        raise ValidationError("duplicate lemmas in word split input")
    if len(lemmas) < 3:
        raise ValidationError(f"need at least 3 lemmas to split, got {len(lemmas)}")
    rng = random.Random(seed)
    order = list(lemmas)
    rng.shuffle(order)

    n_train, n_dev, n_test = largest_remainder(
        len(order), [SPLIT_SHARES[s] for s in SPLITS]
    )
    if n_dev == 0:
        n_dev, n_train = 1, n_train - 1
    if n_test == 0:
        n_test, n_train = 1, n_train - 1

    train = order[:n_train]
    dev = order[n_train : n_train + n_dev]
    test = order[n_train + n_dev :]

    n_shared = _round_half_up(SHARED_TRAIN_SHARE * n_train)
    shared_pool = list(train)
    rng.shuffle(shared_pool)
    shared = shared_pool[:n_shared]
    return WordSplit(train_words=train, dev_words=dev, test_words=test, shared_words=shared)


def _group_by_lemma_sense(annotations: list[GoldRecord]) -> dict[str, dict[str, list[str]]]:
    grouped: dict[str, dict[str, list[str]]] = {}
    for rec in annotations:
        grouped.setdefault(rec.sentence.lemma, {}).setdefault(rec.sense_id, []).append(rec.sentence.id)
    for senses in grouped.values():
        for sids in senses.values():
            sids.sort()
    return grouped


def redistribute_sentences(annotations: list[GoldRecord], ws: WordSplit, seed: int) -> dict[str, str]:
    """Map every annotated sentence id to exactly one split.

    Non-shared words keep all sentences in their own split. For shared train
    words, a quarter of the sentences move out, stratified per sense by
    largest remainder, dealt alternately to dev then test so the two gain
    equal counts (odd remainder favoring dev) while per-sense proportions in
    train change by at most one sentence.
    """
    grouped = _group_by_lemma_sense(annotations)
    rng = random.Random(seed)
    assignment: dict[str, str] = {}

    for lemma in sorted(grouped):
        senses = grouped[lemma]
        if len(senses) < 2:
            warnings.warn(
                f"lemma {lemma!r} has a single annotated sense; excluded from WiC build",
                stacklevel=2,
            )
            continue
        home = ws.split_of(lemma)
        if home != "train" or not ws.is_shared(lemma):
            for sids in senses.values():
                for sid in sids:
                    assignment[sid] = home
            continue

        sense_ids = sorted(senses)
        counts = [len(senses[s]) for s in sense_ids]
        total = sum(counts)
        target_moved = _round_half_up(MOVED_SENTENCE_SHARE * total)
        quotas = [MOVED_SENTENCE_SHARE * c for c in counts]
        moved_counts = [math.floor(q) for q in quotas]
        remaining = target_moved - sum(moved_counts)
        order = sorted(
            range(len(sense_ids)), key=lambda i: (-(quotas[i] - moved_counts[i]), i)
        )
        for i in order[:remaining]:
            moved_counts[i] += 1

        destination = "dev"  # first moved sentence goes to dev; alternation spans senses
        for i, sense in enumerate(sense_ids):
            sids = list(senses[sense])
            rng.shuffle(sids)
            for j, sid in enumerate(sids):
                if j < moved_counts[i]:
                    assignment[sid] = destination
                    destination = "test" if destination == "dev" else "dev"
                else:
                    assignment[sid] = "train"
    return assignment


@dataclass(frozen=True)
class WicPair:
    lemma: str
    sentence_a_id: str
    sentence_b_id: str
    span_a: tuple[int, int]
    span_b: tuple[int, int]
    label: int
    split: str

    def __post_init__(self):
        if self.sentence_a_id == self.sentence_b_id:
            raise ValidationError("a WiC pair needs two distinct sentences")
        if self.label not in (0, 1):
            raise ValidationError(f"label must be 0 or 1, got {self.label}")

    @property
    def pair_id(self) -> str:
        return f"{self.lemma}:{self.sentence_a_id}::{self.sentence_b_id}"


def _pair_key(a: str, b: str) -> tuple[str, str]:
    return (a, b) if a < b else (b, a)


def generate_pairs(
    split_sentences: dict[str, str],
    annotations: list[GoldRecord],
    seed: int,
    max_per_sentence: int = DEFAULT_MAX_PAIRS_PER_SENTENCE,
) -> list[WicPair]:
    """Pair sentences within each split, balanced and capped per sentence.

    Each sentence alternates between wanting a same-sense and a
    different-sense partner (round-robin over a seeded sentence order) until
    it reaches the cap or runs out of candidates. Per split, excess
    majority-label pairs are then dropped, lowest-degree pairs first, pulling
    the label balance to 50% where candidate availability allows.
    """
    by_id = {rec.sentence.id: rec for rec in annotations}
    missing = sorted(set(split_sentences) - set(by_id))
    if missing:
        raise ValidationError(f"split references unannotated sentence ids: {missing[:5]}")

    rng = random.Random(seed)
    all_pairs: list[WicPair] = []

    for split in SPLITS:
        split_ids = sorted(sid for sid, s in split_sentences.items() if s == split)
        lemma_groups: dict[str, list[str]] = {}
        for sid in split_ids:
            lemma_groups.setdefault(by_id[sid].sentence.lemma, []).append(sid)

        split_pairs: list[tuple[str, str, str, int]] = []  # (lemma, a, b, label)
        degree: dict[str, int] = {sid: 0 for sid in split_ids}

        for lemma in sorted(lemma_groups):
            sids = lemma_groups[lemma]
            if len(sids) < 2:
                continue
            sense_of = {sid: by_id[sid].sense_id for sid in sids}
            order = list(sids)
            rng.shuffle(order)
            used: set[tuple[str, str]] = set()
            want_positive = {sid: True for sid in sids}
            exhausted: set[str] = set()

            while True:
                progressed = False
                for s in order:
                    if s in exhausted or degree[s] >= max_per_sentence:
                        continue
                    partner = None
                    achieved = None
                    for want in (want_positive[s], not want_positive[s]):
                        eligible = [
                            t
                            for t in sids
                            if t != s
                            and degree[t] < max_per_sentence
                            and (sense_of[t] == sense_of[s]) == want
                            and _pair_key(s, t) not in used
                        ]
                        if eligible:
                            partner = eligible[rng.randrange(len(eligible))]
                            achieved = 1 if want else 0
                            break
                    if partner is None:
                        exhausted.add(s)
                        continue
                    a, b = _pair_key(s, partner)
                    used.add((a, b))
                    split_pairs.append((lemma, a, b, achieved))
                    degree[a] += 1
                    degree[b] += 1
                    want_positive[s] = not want_positive[s]
                    progressed = True
                if not progressed:
                    break

        split_pairs = _balance_labels(split_pairs, degree)
        for lemma, a, b, label in split_pairs:
            all_pairs.append(
                WicPair(
                    lemma=lemma,
                    sentence_a_id=a,
                    sentence_b_id=b,
                    span_a=by_id[a].sentence.target_span,
                    span_b=by_id[b].sentence.target_span,
                    label=label,
                    split=split,
                )
            )

    rank = {s: i for i, s in enumerate(SPLITS)}
    all_pairs.sort(key=lambda p: (rank[p.split], p.lemma, p.sentence_a_id, p.sentence_b_id))
    return all_pairs


def _balance_labels(
    pairs: list[tuple[str, str, str, int]], degree: dict[str, int]
) -> list[tuple[str, str, str, int]]:
    """Drop excess majority-label pairs, lowest current degree first."""
    n_pos = sum(1 for p in pairs if p[3] == 1)
    n_neg = len(pairs) - n_pos
    excess = abs(n_pos - n_neg)
    if excess == 0:
        return pairs
    majority = 1 if n_pos > n_neg else 0

    deg = dict(degree)
    dropped: set[tuple[str, str, str, int]] = set()
    heap = [
        (deg[p[1]] + deg[p[2]], p[1], p[2], p) for p in pairs if p[3] == majority
    ]
    heapq.heapify(heap)
    while excess > 0 and heap:
        dsum, _, _, p = heapq.heappop(heap)
        current = deg[p[1]] + deg[p[2]]
        if current != dsum:
            heapq.heappush(heap, (current, p[1], p[2], p))
            continue
        dropped.add(p)
        deg[p[1]] -= 1
        deg[p[2]] -= 1
        excess -= 1
    for p in dropped:
        degree[p[1]] -= 1
        degree[p[2]] -= 1
    return [p for p in pairs if p not in dropped]


def dataset_stats(annotations: list[GoldRecord]) -> list[dict]:
    """Per-language summary of the gold corpus: counts plus mean and sd of
    senses per word and sentences per sense (population sd)."""
    by_lang: dict[str, list[GoldRecord]] = {}
    for rec in annotations:
        by_lang.setdefault(rec.sentence.lang, []).append(rec)

    rows = []
    for lang in sorted(by_lang):
        recs = by_lang[lang]
        senses_per_word: dict[str, set[str]] = {}
        sents_per_sense: dict[tuple[str, str], int] = {}
        for rec in recs:
            lemma = rec.sentence.lemma
            senses_per_word.setdefault(lemma, set()).add(rec.sense_id)
            key = (lemma, rec.sense_id)
            sents_per_sense[key] = sents_per_sense.get(key, 0) + 1

        word_counts = [len(v) for v in senses_per_word.values()]
        sense_counts = list(sents_per_sense.values())
        rows.append(
            {
                "lang": lang,
                "words": len(senses_per_word),
                "sentences": len(recs),
                "senses": len(sents_per_sense),
                "avg_senses_per_word": _mean(word_counts),
                "sd_senses_per_word": _pop_sd(word_counts),
                "avg_sentences_per_sense": _mean(sense_counts),
                "sd_sentences_per_sense": _pop_sd(sense_counts),
            }
        )
    return rows


def _mean(xs: list[int]) -> float:
    return sum(xs) / len(xs) if xs else 0.0


def _pop_sd(xs: list[int]) -> float:
    if not xs:
        return 0.0
    mu = _mean(xs)
    return math.sqrt(sum((x - mu) ** 2 for x in xs) / len(xs))


def render_stats_table(rows: list[dict]) -> str:
    headers = ["Language", "Words", "Sentences", "Senses", "Avg. Senses/Word", "Avg. Sentences/Sense"]
    body = [
        [
            r["lang"],
            str(r["words"]),
            str(r["sentences"]),
            str(r["senses"]),
            f"{r['avg_senses_per_word']:.2f} ± {r['sd_senses_per_word']:.2f}",
            f"{r['avg_sentences_per_sense']:.2f} ± {r['sd_sentences_per_sense']:.2f}",
        ]
        for r in rows
    ]
    widths = [max(len(h), *(len(r[i]) for r in body)) if body else len(h) for i, h in enumerate(headers)]
    lines = [
        "  ".join(h.ljust(w) for h, w in zip(headers, widths)),
        "  ".join("-" * w for w in widths),
    ]
    for r in body:
        lines.append("  ".join(c.ljust(w) for c, w in zip(r, widths)))
    return "\n".join(lines)


def wic_stats(pairs: list[WicPair], ws: WordSplit | None = None) -> dict:
    """Counts mirroring the dataset summary: pairs, words per split, shared words.

    A lemma counts toward a split iff it contributes at least one pair there.
    """
    out: dict = {"pairs": {}, "words": {}, "label_balance": {}}
    lemmas_by_split: dict[str, set[str]] = {s: set() for s in SPLITS}
    for split in SPLITS:
        split_pairs = [p for p in pairs if p.split == split]
        out["pairs"][split] = len(split_pairs)
        n_pos = sum(1 for p in split_pairs if p.label == 1)
        out["label_balance"][split] = (n_pos / len(split_pairs)) if split_pairs else None
        lemmas_by_split[split] = {p.lemma for p in split_pairs}
        out["words"][split] = len(lemmas_by_split[split])
    out["words_in_all_splits"] = len(
        lemmas_by_split["train"] & lemmas_by_split["dev"] & lemmas_by_split["test"]
    )
    return out


def write_wic_jsonl(
    pairs: list[WicPair],
    records_by_id: dict[str, GoldRecord],
    path: str | Path,
    meta: dict | None = None,
) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        if meta is not None:
            fh.write(json.dumps({"_meta": meta}, ensure_ascii=False) + "\n")
        for p in pairs:
            rec_a = records_by_id[p.sentence_a_id].sentence
            rec_b = records_by_id[p.sentence_b_id].sentence
            fh.write(
                json.dumps(
                    {
                        "pair_id": p.pair_id,
                        "lemma": p.lemma,
                        "sentence1": rec_a.text,
                        "sentence2": rec_b.text,
                        "span1": list(p.span_a),
                        "span2": list(p.span_b),
                        "label": p.label,
                    },
                    ensure_ascii=False,
                )
                + "\n"
            )


def write_wic_tsv(pairs: list[WicPair], records_by_id: dict[str, GoldRecord], path: str | Path) -> None:
    cols = ["pair_id", "lemma", "sentence1", "sentence2", "span1", "span2", "label"]
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\t".join(cols) + "\n")
        for p in pairs:
            rec_a = records_by_id[p.sentence_a_id].sentence
            rec_b = records_by_id[p.sentence_b_id].sentence
            fh.write(
                "\t".join(
                    [
                        p.pair_id,
                        p.lemma,
                        rec_a.text.replace("\t", " "),
                        rec_b.text.replace("\t", " "),
                        f"{p.span_a[0]}:{p.span_a[1]}",
                        f"{p.span_b[0]}:{p.span_b[1]}",
                        str(p.label),
                    ]
                )
                + "\n"
            )
