"""Calibration-point synthesis: the reference designs shown to the language model first."""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Sequence

from . import turbo
from .design_space import ParameterDef, SearchRegion
from .errors import ConfigError, GoodPointsNotFound
from .fom import is_good_point
from .records import CALIBRATION, EvaluationRecord

log = logging.getLogger(__name__)

RETRY_THRESHOLD_STEP = 10.0


@dataclass(frozen=True)
class CalibrationSet:
    all: tuple[EvaluationRecord, ...]
    good: tuple[EvaluationRecord, ...]
    selected: tuple[EvaluationRecord, ...]
    threshold: float
    attempts: int = 1

    @property
    def best(self) -> EvaluationRecord:
        return self.selected[0]


def rank(records: Sequence[EvaluationRecord]) -> list[EvaluationRecord]:
    """FoM descending; ties go to the earlier step."""
    return sorted(records, key=lambda r: (-r.fom, r.step))


def select(records: Sequence[EvaluationRecord], threshold: float = 0.0, k: int = 5, attempts: int = 1) -> CalibrationSet:
    """Filter good points and keep the top ``k``.  Raises when nothing qualifies."""
    if k < 1:
        raise ConfigError("k must be at least 1")
    good = tuple(r for r in records if not r.failed and is_good_point(r.specs, threshold))
    if not good:
        raise GoodPointsNotFound(threshold, len(records))
    return CalibrationSet(tuple(records), good, tuple(rank(good)[:k]), threshold, attempts)


def synthesize(
    full: SearchRegion,
    defs: Sequence[ParameterDef],
    evaluator,
    budget: int = 200,
    threshold: float = 0.0,
    k: int = 5,
    seed=0,
    config: turbo.TurboConfig | None = None,
    retries: int = 0,
    start_step: int = 0,
) -> CalibrationSet:
    """Run the optimizer over the full space and rank the good designs.

    With ``retries`` > 0 a failed attempt is first continued for another
    ``budget`` evaluations (doubling the total), and then, if still empty,
    the gain threshold is lowered by 10 dB.  Records keep their steps so
    the run log stays append-only; a final failure carries them on the
    exception as ``records``.
    """
    if not 0 <= retries <= 2:
        raise ConfigError("retries must be 0, 1 or 2")
    result = turbo.run(full, defs, budget, evaluator, seed=seed, config=config)
    records = [r.stamped(start_step + i, CALIBRATION) for i, r in enumerate(result.records)]
    try:
        return select(records, threshold, k)
    except GoodPointsNotFound as exc:
        if retries == 0:
            exc.records = records
            raise
    log.warning("no good calibration points in %d evaluations; doubling the budget", len(records))
    more = turbo.run(full, defs, budget, evaluator, seed=seed, config=config, warm_start=records)
    records += [r.stamped(start_step + len(records) + i, CALIBRATION) for i, r in enumerate(more.records)]
    try:
        return select(records, threshold, k, attempts=2)
    except GoodPointsNotFound as exc:
        if retries == 1:
            exc.records = records
            raise
    lowered = threshold - RETRY_THRESHOLD_STEP
    log.warning("still no good points; lowering the gain threshold to %g dB", lowered)
    try:
        return select(records, lowered, k, attempts=3)
    except GoodPointsNotFound as exc:
        exc.records = records
        raise
