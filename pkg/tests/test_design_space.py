import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ledro.design_space import (
    DesignPoint,
    NetlistTemplate,
    ParameterDef,
    SearchRegion,
    benchmark_from_dict,
    clamp_region,
    format_value,
    from_unit,
    load_benchmark,
    render_netlist,
    to_unit,
)
from ledro.errors import ConfigError, OutOfRegionError, RegionSchemaError, TemplateError

from conftest import check_golden

FIN_DEF = ParameterDef("nfin_M1", "fin", 1, 64)
BIAS_DEF = ParameterDef("vbias1", "bias", 0.0, 0.7, unit="V")
LEN_DEF = ParameterDef("l_M1", "length", 7, 21, allowed_values=(7, 14, 21), unit="nm")
DEFS = (FIN_DEF, BIAS_DEF, LEN_DEF)
FULL = SearchRegion.full(DEFS)


class TestParameterDef:
    def test_fin_bounds_must_be_integers(self):
        with pytest.raises(ConfigError):
            ParameterDef("n", "fin", 0.5, 4)
        with pytest.raises(ConfigError):
            ParameterDef("n", "fin", 0, 4)

    def test_lower_below_upper(self):
        with pytest.raises(ConfigError):
            ParameterDef("v", "bias", 1.0, 1.0)

    def test_allowed_values_sorted_unique_inside(self):
        with pytest.raises(ConfigError):
            ParameterDef("l", "length", 7, 21, allowed_values=(14, 7))
        with pytest.raises(ConfigError):
            ParameterDef("l", "length", 7, 21, allowed_values=(7, 7, 14))
        with pytest.raises(ConfigError):
            ParameterDef("l", "length", 7, 21, allowed_values=(7, 28))

    def test_unknown_kind(self):
        with pytest.raises(ConfigError):
            ParameterDef("x", "width", 1, 2)


class TestClamp:
    def test_valid_interval_unchanged(self):
        r = clamp_region({"nfin_M1": (10, 30)}, FULL, DEFS)
        assert r.interval("nfin_M1") == (10, 30)

    def test_one_sided_clamp(self):
        r = clamp_region({"vbias1": (0.2, 0.9)}, FULL, DEFS)
        assert r.interval("vbias1") == (0.2, 0.7)

    def test_disjoint_above_gives_upper_half(self):
        r = clamp_region({"nfin_M1": (80, 120)}, FULL, DEFS)
        assert r.interval("nfin_M1") == (32, 64)

    def test_disjoint_below_gives_lower_half(self):
        r = clamp_region({"vbias1": (-0.5, -0.1)}, FULL, DEFS)
        assert r.interval("vbias1") == pytest.approx((0.0, 0.35))

    def test_integer_intervals_round_outward(self):
        r = clamp_region({"nfin_M1": (10.4, 29.2)}, FULL, DEFS)
        assert r.interval("nfin_M1") == (10, 30)

    def test_length_intervals_round_outward(self):
        r = clamp_region({"l_M1": (8, 15)}, FULL, DEFS)
        assert r.interval("l_M1") == (7, 21)
        assert clamp_region({"l_M1": (14, 14)}, FULL, DEFS).interval("l_M1") == (14, 14)

    def test_missing_parameters_inherit_previous(self):
        prev = SearchRegion(FULL.names, ((5, 6), (0.1, 0.2), (14, 21)))
        r = clamp_region({"nfin_M1": (10, 30)}, FULL, DEFS, previous=prev)
        assert r.intervals[1:] == prev.intervals[1:]
        r0 = clamp_region({"nfin_M1": (10, 30)}, FULL, DEFS)
        assert r0.intervals[1:] == FULL.intervals[1:]

    def test_reversed_interval_is_swapped(self):
        assert clamp_region({"nfin_M1": (30, 10)}, FULL, DEFS).interval("nfin_M1") == (10, 30)

    def test_unknown_name(self):
        with pytest.raises(RegionSchemaError):
            clamp_region({"nfin_M9": (1, 2)}, FULL, DEFS)


@st.composite
def proposals(draw):
    out = {}
    for d in DEFS:
        if draw(st.booleans()):
            span = d.upper - d.lower
            a = draw(st.floats(d.lower - 2 * span, d.upper + 2 * span))
            b = draw(st.floats(d.lower - 2 * span, d.upper + 2 * span))
            out[d.name] = (a, b)
    return out


@given(proposals())
def test_clamp_idempotent_and_contained(prop):
    once = clamp_region(prop, FULL, DEFS)
    assert clamp_region(once, FULL, DEFS) == once
    for (lo, hi), (flo, fhi) in zip(once.intervals, FULL.intervals):
        assert flo <= lo <= hi <= fhi


@given(st.floats(0.0, 0.7), st.floats(0.0, 0.7))
def test_clamp_never_widens_contained_continuous_intervals(a, b):
    lo, hi = sorted((a, b))
    region = clamp_region({"vbias1": (lo, hi)}, FULL, DEFS)
    assert region.interval("vbias1") == (lo, hi)


@given(st.integers(1, 64), st.integers(1, 64))
def test_clamp_keeps_contained_integer_intervals(a, b):
    lo, hi = sorted((a, b))
    assert clamp_region({"nfin_M1": (lo, hi)}, FULL, DEFS).interval("nfin_M1") == (lo, hi)


class TestUnitScaling:
    def test_midpoint(self):
        region = SearchRegion(FULL.names, ((1, 63), (0.0, 0.7), (7, 21)))
        p = DesignPoint(FULL.names, (32, 0.35, 14.0))
        assert np.allclose(to_unit(p, region), 0.5)

    def test_lower_corner(self):
        p = DesignPoint(FULL.names, (1, 0.0, 7.0))
        assert np.allclose(to_unit(p, FULL), 0.0)

    def test_fin_sixteen(self):
        p = DesignPoint(FULL.names, (16, 0.0, 7.0))
        assert to_unit(p, FULL)[0] == pytest.approx(15 / 63)
        assert round(to_unit(p, FULL)[0], 4) == 0.2381

    def test_zero_width_maps_to_half(self):
        region = SearchRegion(FULL.names, ((4, 4), (0.0, 0.7), (7, 21)))
        assert to_unit(DesignPoint(FULL.names, (4, 0.1, 7.0)), region)[0] == 0.5

    def test_outside_region(self):
        region = SearchRegion(FULL.names, ((4, 8), (0.0, 0.7), (7, 21)))
        with pytest.raises(OutOfRegionError):
            to_unit(DesignPoint(FULL.names, (9, 0.1, 7.0)), region)

    def test_from_unit_examples(self):
        assert from_unit(np.zeros(3), FULL, DEFS)["nfin_M1"] == 1
        assert from_unit(np.full(3, 0.5), FULL, DEFS)["l_M1"] == 14
        # 1 + 0.5 * 63 = 32.5 rounds half up
        assert from_unit(np.full(3, 0.5), FULL, DEFS).values == (33, 0.35, 14.0)

    def test_from_unit_rejects_outside_cube(self):
        with pytest.raises(OutOfRegionError):
            from_unit(np.array([1.2, 0.5, 0.5]), FULL, DEFS)


@st.composite
def region_and_point(draw):
    ivs = []
    for d in DEFS:
        a = draw(st.floats(0, 1))
        b = draw(st.floats(0, 1))
        lo, hi = sorted((d.lower + a * (d.upper - d.lower), d.lower + b * (d.upper - d.lower)))
        ivs.append((lo, hi))
    region = clamp_region(dict(zip(FULL.names, ivs)), FULL, DEFS)
    u = np.array(draw(st.lists(st.floats(0, 1), min_size=3, max_size=3)))
    return region, from_unit(u, region, DEFS)


@given(region_and_point())
def test_round_trip_on_snapped_points(rp):
    region, p = rp
    assert from_unit(to_unit(p, region), region, DEFS) == p


class TestNetlist:
    def test_no_placeholders_verbatim(self):
        t = NetlistTemplate("plain", "R1 a b 1k\n")
        assert render_netlist(t, DesignPoint((), ())) == "R1 a b 1k\n"

    def test_single_placeholder(self):
        t = NetlistTemplate("one", "M1 d g s b nfet nfin={nfin_M1}\n")
        out = render_netlist(t, DesignPoint(("nfin_M1",), (12,)))
        assert "nfin=12" in out

    def test_missing_placeholder_lists_names(self):
        t = NetlistTemplate("two", "{a} {b} {c}")
        with pytest.raises(TemplateError) as info:
            render_netlist(t, DesignPoint(("a",), (1,)))
        assert info.value.missing == ("b", "c")

    def test_format_rules(self):
        assert format_value(12) == "12"
        assert format_value(0.35) == "3.50000e-01"
        assert format_value(2e-13) == "2.00000e-13"

    def test_empty_topology_rejected(self):
        with pytest.raises(ConfigError):
            NetlistTemplate("  ", "x")

    def test_placeholder_set_must_match(self, two_stage):
        data = json.loads((two_stage_dir() / "two_stage.json").read_text())
        body = (two_stage_dir() / "two_stage.cir").read_text()
        with pytest.raises(TemplateError):
            benchmark_from_dict(data, body.replace("{cc}", "1p"))
        with pytest.raises(TemplateError):
            benchmark_from_dict(data, body + "R9 a b {orphan}\n")

    def test_two_stage_golden(self, two_stage):
        p = DesignPoint.from_mapping(two_stage.defs, FIXTURE_POINT)
        check_golden("two_stage_netlist.cir", render_netlist(two_stage.template, p))

    def test_deterministic(self, two_stage):
        p = DesignPoint.from_mapping(two_stage.defs, FIXTURE_POINT)
        assert render_netlist(two_stage.template, p) == render_netlist(two_stage.template, p)


FIXTURE_POINT = dict(
    nfin_in=12, l_in=20, nfin_load=40, l_load=40, nfin_tail=36, l_tail=40, nfin_cs=44, l_cs=30,
    nfin_sink=33, l_sink=80, ibias=3.5e-6, vcm=0.4, cc=1.1e-12,
)


def two_stage_dir():
    from importlib import resources

    return resources.files("ledro") / "benchmarks"


def test_builtin_benchmarks_load():
    for name in ("two_stage", "five_t"):
        b = load_benchmark(name)
        assert b.template.placeholders == set(b.names) | set(b.template.constants)


def test_benchmark_file_path(tmp_path):
    src = two_stage_dir()
    (tmp_path / "two_stage.cir").write_text((src / "two_stage.cir").read_text())
    (tmp_path / "bench.json").write_text((src / "two_stage.json").read_text())
    assert load_benchmark(tmp_path / "bench.json").names == load_benchmark("two_stage").names
    with pytest.raises(ConfigError):
        load_benchmark(tmp_path / "missing.json")
