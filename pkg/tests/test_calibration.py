import pytest

from ledro.calibration import rank, select, synthesize
from ledro.design_space import DesignPoint, ParameterDef, SearchRegion
from ledro.errors import ConfigError, GoodPointsNotFound
from ledro.evaluator import evaluate_batch
from ledro.fom import SpecSet
from ledro.records import CALIBRATION, EvaluationRecord

DEFS = (ParameterDef("x", "bias", 0.0, 1.0), ParameterDef("y", "bias", 0.0, 1.0))
FULL = SearchRegion.full(DEFS)


def rec(step, gain, fom, failed=False):
    specs = None if failed else SpecSet(gain, 1e6, 60.0, 1e-6)
    return EvaluationRecord(DesignPoint(("x", "y"), (0.0, 0.0)), specs, fom, step=step, failed=failed)


class GainEvaluator:
    """Gain rises to 20 dB along x; FoM is -(distance to (0.8, 0.3))."""

    def evaluate(self, p):
        x, y = p.values
        return EvaluationRecord(p, SpecSet(20.0 * x, 1e6, 60.0, 1e-6), -((x - 0.8) ** 2 + (y - 0.3) ** 2))

    def evaluate_batch(self, points, parallelism=1):
        return evaluate_batch(self.evaluate, points, parallelism)


class TestSelect:
    def test_filters_and_ranks(self):
        records = [rec(0, 10, -0.5), rec(1, -3, -0.1), rec(2, 0, -0.05), rec(3, 5, -0.2), rec(4, 7, -0.2),
                   rec(5, 0, 0.0, failed=True)]
        cs = select(records, threshold=0.0, k=2)
        assert [r.step for r in cs.good] == [0, 3, 4]
        assert [r.step for r in cs.selected] == [3, 4]
        assert cs.best.step == 3

    def test_strict_threshold(self):
        with pytest.raises(GoodPointsNotFound):
            select([rec(0, 0.0, -1.0)], threshold=0.0)

    def test_fewer_than_k(self):
        assert len(select([rec(0, 1, -1.0)], k=5).selected) == 1

    def test_k_validated(self):
        with pytest.raises(ConfigError):
            select([rec(0, 1, -1.0)], k=0)

    def test_rank_ties_by_step(self):
        assert [r.step for r in rank([rec(2, 1, -1.0), rec(1, 1, -1.0), rec(0, 1, -0.5)])] == [0, 1, 2]


class TestSynthesize:
    def test_budget_and_stamps(self):
        cs = synthesize(FULL, DEFS, GainEvaluator(), budget=40, threshold=5.0, seed=0)
        assert len(cs.all) == 40
        assert [r.step for r in cs.all] == list(range(40))
        assert all(r.phase == CALIBRATION for r in cs.all)
        assert all(r.specs.gain > 5.0 for r in cs.good)
        assert cs.selected == tuple(rank(cs.good)[:5])
        assert cs.attempts == 1

    def test_start_step_offset(self):
        cs = synthesize(FULL, DEFS, GainEvaluator(), budget=20, seed=0, start_step=100)
        assert cs.all[0].step == 100

    def test_deterministic(self):
        a = synthesize(FULL, DEFS, GainEvaluator(), budget=30, seed=4)
        b = synthesize(FULL, DEFS, GainEvaluator(), budget=30, seed=4)
        assert [r.point for r in a.all] == [r.point for r in b.all]

    def test_lowered_threshold_on_second_retry(self):
        cs = synthesize(FULL, DEFS, GainEvaluator(), budget=20, threshold=25.0, seed=0, retries=2)
        assert cs.attempts == 3 and cs.threshold == 15.0
        assert len(cs.all) == 40

    def test_failure_without_retries_carries_records(self):
        with pytest.raises(GoodPointsNotFound) as info:
            synthesize(FULL, DEFS, GainEvaluator(), budget=20, threshold=25.0, seed=0)
        assert len(info.value.records) == 20

    def test_exhausted_retries(self):
        with pytest.raises(GoodPointsNotFound) as info:
            synthesize(FULL, DEFS, GainEvaluator(), budget=20, threshold=40.0, seed=0, retries=2)
        assert len(info.value.records) == 40

    def test_two_stage_low_preset(self, evaluator, two_stage):
        cs = synthesize(two_stage.full_region, two_stage.defs, evaluator, budget=200, seed=0)
        assert len(cs.all) == 200 and 1 <= len(cs.selected) <= 5
        assert cs.best.fom == max(r.fom for r in cs.good)
