"""Optimizer feedback classification."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from ..fom import is_good_point
from ..records import EvaluationRecord

MIN_GOOD = 6  # "more than five" good designs


@dataclass(frozen=True)
class FeedbackVerdict:
    positive: bool
    good_count: int
    best_fom: float
    prior_best: float

    @property
    def label(self) -> str:
        return "positive" if self.positive else "negative"

    def as_dict(self) -> dict:
        return {
            "class": self.label,
            "good_count": self.good_count,
            "best_fom": self.best_fom,
            "prior_best": self.prior_best,
        }


def good_records(records: Sequence[EvaluationRecord], threshold: float = 0.0) -> list[EvaluationRecord]:
    return [r for r in records if not r.failed and is_good_point(r.specs, threshold)]


def classify_feedback(
    records: Sequence[EvaluationRecord], prior_best: float, threshold: float = 0.0
) -> FeedbackVerdict:
    """Positive iff at least six good designs and a strictly better best FoM."""
    good = len(good_records(records, threshold))
    best = max((r.fom for r in records), default=float("-inf"))
    return FeedbackVerdict(good >= MIN_GOOD and best > prior_best, good, best, prior_best)
