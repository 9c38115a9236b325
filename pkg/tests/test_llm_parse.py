import numpy as np
import pytest

from ledro.design_space import SearchRegion, clamp_region, load_benchmark
from ledro.errors import RegionParseFailure
from ledro.llm.parse import extract_ranges, parse_region
from ledro.llm.prompts import render_region

BENCH = load_benchmark("two_stage")
DEFS, FULL = BENCH.defs, BENCH.full_region

FAIL = "fail"

# (id, response, expected intervals for the parameters that should change)
FIXTURES = [
    ("clean", "nfin_in: 10 to 30\nvcm: 0.3 to 0.5", {"nfin_in": (10, 30), "vcm": (0.3, 0.5)}),
    ("brackets", "ibias: [1e-6, 2e-6]", {"ibias": (1e-6, 2e-6)}),
    ("en-dash with unit", "vcm = 0.35 – 0.45 V", {"vcm": (0.35, 0.45)}),
    ("em-dash", "vcm: 0.35—0.45", {"vcm": (0.35, 0.45)}),
    ("double dot", "nfin_cs: 12..20", {"nfin_cs": (12, 20)}),
    ("si prefix current", "ibias: 1.5 uA to 3 uA", {"ibias": (1.5e-6, 3e-6)}),
    ("micro sign", "ibias: 1.5µA to 2µA", {"ibias": (1.5e-6, 2e-6)}),
    ("prefix on capacitance", "cc: 0.5 pF to 1.5 pF", {"cc": (0.5e-12, 1.5e-12)}),
    ("nanometres kept", "l_in: 14 nm to 30 nm", {"l_in": (14, 30)}),
    ("bracket shared unit", "cc: [0.8, 1.2] pF", {"cc": (0.8e-12, 1.2e-12)}),
    ("markdown bold with note", "- **nfin_load** (load mirror): 20 to 48 fins", {"nfin_load": (20, 48)}),
    ("backticks", "`nfin_tail`: 30 to 40", {"nfin_tail": (30, 40)}),
    ("from wording", "I would keep nfin_sink from 24 to 40.", {"nfin_sink": (24, 40)}),
    ("between wording", "vcm between 0.3 and 0.4", {"vcm": (0.3, 0.4)}),
    ("between with to", "Set vcm between 0.3 to 0.4 V.", {"vcm": (0.3, 0.4)}),
    ("reversed endpoints", "nfin_in: 30 to 10", {"nfin_in": (10, 30)}),
    ("prose wrapped",
     "Looking at the designs, the input pair is too small.\nnfin_in: 16 to 40\nThe rest can stay as they are.",
     {"nfin_in": (16, 40)}),
    ("last occurrence wins", "nfin_in: 10 to 20\nOn second thought, nfin_in: 12 to 24", {"nfin_in": (12, 24)}),
    ("trailing word ignored", "vcm: 0.3 to 0.5 for better headroom", {"vcm": (0.3, 0.5)}),
    ("clashing unit rejected", "vcm: 0.3 A to 0.5 A\nnfin_in: 4 to 8", {"nfin_in": (4, 8)}),
    ("out of range clamped", "nfin_in: 50 to 90", {"nfin_in": (50, 64)}),
    ("disjoint goes to half", "nfin_in: 70 to 90", {"nfin_in": (32, 64)}),
    ("fractional fins widen", "nfin_in: 10.5 to 20.2", {"nfin_in": (10, 21)}),
    ("lengths snap outward", "l_cs: 25 to 35 nm", {"l_cs": (20, 40)}),
    ("name prefix is not a match", "nfin_in_extra: 1 to 2", FAIL),
    ("mention without range", "I suggest increasing nfin_in a lot.", FAIL),
    ("empty", "   ", FAIL),
    ("only prose", "These designs look fine. Keep going.", FAIL),
    ("malformed numbers", "nfin_in: ten to twenty", FAIL),
    ("partial answer", "nfin_in: 10 to 30\nvcm: higher", {"nfin_in": (10, 30)}),
    ("table row", "| nfin_cs | 20 to 30 |", FAIL),
    ("several on one line", "nfin_in: 10 to 20, nfin_load: 30 to 40", {"nfin_in": (10, 20), "nfin_load": (30, 40)}),
]


@pytest.mark.parametrize("response,expected", [f[1:] for f in FIXTURES], ids=[f[0] for f in FIXTURES])
def test_fixture(response, expected):
    if expected == FAIL:
        with pytest.raises(RegionParseFailure):
            parse_region(response, DEFS, FULL)
        return
    region = parse_region(response, DEFS, FULL)
    for name in FULL.names:
        want = expected.get(name, FULL.interval(name))
        assert region.interval(name) == pytest.approx(want, rel=1e-12), name


def test_fixture_count():
    assert len(FIXTURES) >= 20


def test_missing_parameters_keep_previous_region():
    prev = clamp_region({"vcm": (0.4, 0.5), "nfin_in": (2, 3)}, FULL, DEFS)
    region = parse_region("nfin_in: 10 to 30", DEFS, FULL, previous=prev)
    assert region.interval("nfin_in") == (10, 30)
    assert region.interval("vcm") == (0.4, 0.5)


def test_failure_keeps_response():
    with pytest.raises(RegionParseFailure) as info:
        parse_region("nothing useful", DEFS, FULL)
    assert info.value.response == "nothing useful"


def test_extract_is_unclamped():
    assert extract_ranges("nfin_in: 50 to 90", DEFS) == {"nfin_in": (50.0, 90.0)}


def random_region(rng):
    out = {}
    for d, (lo, hi) in zip(DEFS, FULL.intervals):
        a, b = sorted(rng.uniform(lo, hi, 2))
        out[d.name] = (a, b)
    return clamp_region(out, FULL, DEFS)


def test_round_trip_over_random_regions():
    rng = np.random.default_rng(0)
    for _ in range(1000):
        region = random_region(rng)
        assert parse_region(render_region(region, DEFS), DEFS, FULL) == region


def test_round_trip_with_prose_around():
    rng = np.random.default_rng(1)
    region = random_region(rng)
    text = "Sure! Based on the results:\n\n" + render_region(region, DEFS) + "\n\nGood luck."
    assert parse_region(text, DEFS, FULL) == region


def test_region_equality_is_exact():
    a = SearchRegion(FULL.names, FULL.intervals)
    assert parse_region(render_region(a, DEFS), DEFS, FULL) == a
