"""Annotation-efficiency metrics: sense priors, selection precision, lift.

Lift = precision / prior measures how much model-assisted sentence selection
improves over reviewing random sentences. Counts are kept as exact rationals
until rendering so ratios like 9/25 / 1/25 stay exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .errors import ValidationError

INFINITE_LIFT_LABEL = "∞ (prior = 0)"

Num = Fraction | float | int


def _as_fraction(x: Num, name: str) -> Fraction:
    f = Fraction(x).limit_denominator(10**12) if isinstance(x, float) else Fraction(x)
    if not (0 <= f <= 1):
        raise ValidationError(f"{name} must lie in [0, 1], got {x}")
    return f


@dataclass(frozen=True)
class LiftValue:
    """Precision/prior ratio; infinite when the prior is zero."""

    exact: Fraction | None  # None iff infinite
    infinite: bool = False

    @property
    def value(self) -> float:
        return math.inf if self.infinite else float(self.exact)

    def render_percent(self) -> str:
        if self.infinite:
            return INFINITE_LIFT_LABEL
        return f"{round(self.exact * 100)}%"


def estimate_priors(gold_sample: list[tuple[str, str]]) -> dict[str, Fraction]:
    """Sense prior = share of the manually inspected sample carrying that sense.

    Returns exact fractions; they sum to exactly 1.
    """
    if not gold_sample:
        raise ValidationError("prior sample is empty")
    counts: dict[str, int] = {}
    for _, sense_id in gold_sample:
        counts[sense_id] = counts.get(sense_id, 0) + 1
    total = len(gold_sample)
    return {sense: Fraction(c, total) for sense, c in sorted(counts.items())}


def selection_precision(selected: list[str], gold: dict[str, str], sense: str) -> Fraction:
    """Share of the selected sentences whose gold label is the targeted sense."""
    if not selected:
        raise ValidationError("selected set is empty")
    hits = 0
    for sid in selected:
        if sid not in gold:
            raise ValidationError(f"selected sentence {sid!r} has no gold label")
        if gold[sid] == sense:
            hits += 1
    return Fraction(hits, len(selected))


def lift(precision: Num, prior: Num) -> LiftValue:
    p = _as_fraction(precision, "precision")
    q = _as_fraction(prior, "prior")
    if q == 0:
        if p == 0:
            raise ValidationError("lift is undefined when both precision and prior are zero")
        return LiftValue(exact=None, infinite=True)
    return LiftValue(exact=p / q)


@dataclass(frozen=True)
class EffortReport:
    """Expected review counts for one sense, manual vs. model-assisted.

    Exact values are kept; headline numbers round review counts up and the
    reduction factor down, so 25 manual vs 2.78 assisted reads as
    "3 selections, 8x fewer".
    """

    manual_reviews: Fraction
    assisted_reviews: Fraction
    reduction_factor: Fraction
    display_manual: int
    display_assisted: int
    headline_factor: int

    def headline(self) -> str:
        return (
            f"{self.display_manual} manual reviews vs {self.display_assisted} selections "
            f"({self.headline_factor}× less effort)"
        )


def effort_reduction(prior: Num, precision: Num) -> EffortReport:
    q = _as_fraction(prior, "prior")
    p = _as_fraction(precision, "precision")
    if q == 0 or p == 0:
        raise ValidationError("effort reduction needs prior > 0 and precision > 0")
    manual = 1 / q
    assisted = 1 / p
    display_manual = math.ceil(manual)
    display_assisted = math.ceil(assisted)
    return EffortReport(
        manual_reviews=manual,
        assisted_reviews=assisted,
        reduction_factor=manual / assisted,
        display_manual=display_manual,
        display_assisted=display_assisted,
        headline_factor=math.floor(Fraction(display_manual, display_assisted)),
    )


@dataclass
class SenseLiftRow:
    sense_id: str
    gloss: str
    prior: Fraction
    prior_support: int
    precision: Fraction | None
    precision_support: int
    lift: LiftValue | None

    def to_json(self) -> dict:
        return {
            "sense_id": self.sense_id,
            "gloss": self.gloss,
            "prior": float(self.prior),
            "prior_support": self.prior_support,
            "precision": None if self.precision is None else float(self.precision),
            "precision_support": self.precision_support,
            "lift": None if self.lift is None else (None if self.lift.infinite else float(self.lift.exact)),
            "lift_rendered": None if self.lift is None else self.lift.render_percent(),
            "expected_manual_reviews": None if self.prior == 0 else float(1 / self.prior),
            "expected_assisted_reviews": (
                None if not self.precision else float(1 / self.precision)
            ),
        }


def build_report(
    word: str,
    prior_sample: list[tuple[str, str]],
    selections: dict[str, list[str]],
    gold: dict[str, str],
    glosses: dict[str, str] | None = None,
) -> list[SenseLiftRow]:
    """Per-sense lift rows for one word.

    `selections` maps each targeted sense to the sentence ids the model
    proposed for it; `gold` holds the human labels used to score them.
    """
    priors = estimate_priors(prior_sample)
    senses = sorted(set(priors) | set(selections))
    glosses = glosses or {}
    rows = []
    for sense in senses:
        prior = priors.get(sense, Fraction(0))
        selected = selections.get(sense)
        precision = selection_precision(selected, gold, sense) if selected else None
        lift_value = None
        if precision is not None and not (prior == 0 and precision == 0):
            lift_value = lift(precision, prior)
        rows.append(
            SenseLiftRow(
                sense_id=sense,
                gloss=glosses.get(sense, ""),
                prior=prior,
                prior_support=len(prior_sample),
                precision=precision,
                precision_support=len(selected) if selected else 0,
                lift=lift_value,
            )
        )
    return rows


def render_table(word: str, rows: list[SenseLiftRow]) -> str:
    """Aligned text table: word, sense definitions, lift percentages."""
    headers = ["Word", "Sense", "Definition", "Prior", "Precision", "Lift (%)"]
    body = []
    for row in rows:
        body.append(
            [
                word,
                row.sense_id,
                row.gloss,
                f"{float(row.prior):.2f}",
                "-" if row.precision is None else f"{float(row.precision):.2f}",
                "-" if row.lift is None else row.lift.render_percent(),
            ]
        )
    widths = [max(len(h), *(len(r[i]) for r in body)) if body else len(h) for i, h in enumerate(headers)]
    lines = [
        "  ".join(h.ljust(w) for h, w in zip(headers, widths)),
        "  ".join("-" * w for w in widths),
    ]
    for r in body:
        lines.append("  ".join(c.ljust(w) for c, w in zip(r, widths)))
    return "\n".join(lines)
