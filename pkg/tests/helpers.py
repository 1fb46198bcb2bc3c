"""Synthetic fixture builders shared across test modules."""

from senseloom.corpus import SentenceRecord
from senseloom.gold import GoldRecord


def make_gold(lemma: str, sense_counts: dict[str, int], lang="xx", start=0) -> list[GoldRecord]:
    out = []
    i = start
    for sense, count in sense_counts.items():
        for _ in range(count):
            text = f"Sentence {i:04d} uses the word {lemma} in some context."
            span_start = text.index(lemma)
            out.append(
                GoldRecord(
                    sentence=SentenceRecord(
                        id=f"{lemma}:{i:04d}",
                        lang=lang,
                        lemma=lemma,
                        surface_form=lemma,
                        text=text,
                        target_span=(span_start, span_start + len(lemma)),
                        source="synth",
                    ),
                    sense_id=sense,
                )
            )
            i += 1
    return out


def synthetic_corpus(n_lemmas: int, sentences_per_lemma: int, lang="xx") -> list[GoldRecord]:
    """A corpus of 2- and 3-sense lemmas with mildly skewed sense sizes."""
    gold = []
    for i in range(n_lemmas):
        lemma = f"word{i:02d}"
        if i % 3 == 0:
            third = sentences_per_lemma // 3
            counts = {"s1": third, "s2": third, "s3": sentences_per_lemma - 2 * third}
        else:
            major = (sentences_per_lemma * 2) // 3
            counts = {"s1": major, "s2": sentences_per_lemma - major}
        gold.extend(make_gold(lemma, counts, lang=lang, start=i * 10000))
    return gold
