from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ledro.design_space import from_unit
from ledro.errors import ConfigError
from ledro.llm.transcript import RoundTranscript
from ledro.records import EvaluationRecord
from ledro.runlog import LOG_FILE, RunDirectory, record_to_row, row_to_record


@given(st.lists(st.floats(0, 1), min_size=13, max_size=13), st.integers(0, 5000))
def test_row_round_trip_is_bit_exact(u, step):
    from ledro.design_space import load_benchmark
    from ledro.evaluator import CircuitEvaluator
    from ledro.fom import LOW_COMPLEXITY_BOUNDS

    bench = load_benchmark("two_stage")
    rec = CircuitEvaluator(bench, LOW_COMPLEXITY_BOUNDS).evaluate(from_unit(np.array(u), bench.full_region, bench.defs))
    rec = replace(rec.stamped(step, "ledro-round-2"), wall_time=0.0)
    assert row_to_record(record_to_row(rec), bench.defs) == rec


def test_failed_record_round_trip(two_stage):
    p = from_unit(np.full(13, 0.5), two_stage.full_region, two_stage.defs)
    rec = EvaluationRecord(p, None, -4.0, step=3, phase="calibration", failed=True, error="bad\tthing\nhappened")
    back = row_to_record(record_to_row(rec), two_stage.defs)
    assert back.failed and back.specs is None and back.error == "bad thing happened"


def test_log_append_truncate(tmp_path, evaluator, two_stage):
    rd = RunDirectory(tmp_path)
    rd.start_log()
    pts = [from_unit(np.full(13, x), two_stage.full_region, two_stage.defs) for x in (0.2, 0.5, 0.8)]
    recs = [replace(r.stamped(i, "calibration"), wall_time=0.0) for i, r in enumerate(evaluator.evaluate_batch(pts))]
    rd.append_records(recs)
    assert rd.read_records(two_stage.defs) == recs
    rd.truncate_log(2)
    assert rd.read_records(two_stage.defs) == recs[:2]


def test_bad_header(tmp_path, two_stage):
    (tmp_path / LOG_FILE).write_text("nonsense\n")
    with pytest.raises(ConfigError):
        RunDirectory(tmp_path).read_records(two_stage.defs)


def test_atomic_json(tmp_path):
    rd = RunDirectory(tmp_path)
    rd.write_json("x.json", {"a": 1})
    assert rd.read_json("x.json") == {"a": 1}
    assert not (tmp_path / "x.json.tmp").exists()


def test_transcript_round_trip_and_render():
    t = RoundTranscript(1, "sys", "user", "nfin_in: 1 to 2", {"nfin_in": (1, 2)}, verdict={
        "class": "positive", "good_count": 7, "best_fom": -0.5, "prior_best": -0.6})
    assert RoundTranscript.from_dict(t.as_dict()) == t
    text = t.render()
    assert "=== parsed region ===" in text and "nfin_in: 1 to 2" in text
    assert "reflection" not in text
