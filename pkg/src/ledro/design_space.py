"""Circuit parameters, search regions, unit-cube scaling and netlist templating."""
from __future__ import annotations

import json
import math
import re
from bisect import bisect_left, bisect_right
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .errors import ConfigError, OutOfRegionError, RegionSchemaError, TemplateError

FIN = "fin"
LENGTH = "length"
BIAS = "bias"
KINDS = (FIN, LENGTH, BIAS)

_PLACEHOLDER = re.compile(r"\{([A-Za-z_][A-Za-z0-9_]*)\}")
_TOL = 1e-9


@dataclass(frozen=True)
class ParameterDef:
    name: str
    kind: str
    lower: float
    upper: float
    allowed_values: tuple[float, ...] | None = None
    unit: str = ""

    def __post_init__(self):
        if not re.fullmatch(r"[A-Za-z_][A-Za-z0-9_]*", self.name):
            raise ConfigError(f"invalid parameter name {self.name!r}")
        if self.kind not in KINDS:
            raise ConfigError(f"{self.name}: unknown kind {self.kind!r}")
        if not self.lower < self.upper:
            raise ConfigError(f"{self.name}: lower must be < upper")
        if self.kind == FIN:
            if self.lower != int(self.lower) or self.upper != int(self.upper) or self.lower < 1:
                raise ConfigError(f"{self.name}: fin bounds must be integers >= 1")
        if self.kind == LENGTH:
            if not self.allowed_values:
                raise ConfigError(f"{self.name}: gate-length parameters need allowed_values")
            vals = tuple(float(v) for v in self.allowed_values)
            if list(vals) != sorted(set(vals)):
                raise ConfigError(f"{self.name}: allowed_values must be sorted and unique")
            if vals[0] < self.lower or vals[-1] > self.upper:
                raise ConfigError(f"{self.name}: allowed_values outside [lower, upper]")
            object.__setattr__(self, "allowed_values", vals)
        elif self.allowed_values is not None:
            raise ConfigError(f"{self.name}: allowed_values only apply to gate lengths")

    @property
    def discrete(self) -> bool:
        return self.kind != BIAS

    def snap(self, value: float, lo: float | None = None, hi: float | None = None):
        """Nearest legal value within ``[lo, hi]`` (defaults to the full range)."""
        lo = self.lower if lo is None else lo
        hi = self.upper if hi is None else hi
        value = min(max(value, lo), hi)
        if self.kind == FIN:
            v = int(math.floor(value + 0.5))
            return int(min(max(v, math.ceil(lo - _TOL)), math.floor(hi + _TOL)))
        if self.kind == LENGTH:
            vals = [v for v in self.allowed_values if lo - _TOL <= v <= hi + _TOL]
            if not vals:
                vals = list(self.allowed_values)
            return min(vals, key=lambda v: (abs(v - value), v))
        return float(value)

    def is_legal(self, value) -> bool:
        slack = _TOL * max(abs(self.lower), abs(self.upper))
        if not (self.lower - slack <= value <= self.upper + slack):
            return False
        if self.kind == FIN:
            return float(value) == int(value)
        if self.kind == LENGTH:
            return any(abs(value - v) <= _TOL * max(1.0, abs(v)) for v in self.allowed_values)
        return math.isfinite(value)

    def outward(self, lo: float, hi: float) -> tuple[float, float]:
        """Round an interval outward onto the legal grid of this parameter."""
        if self.kind == FIN:
            return float(math.floor(lo + _TOL)), float(math.ceil(hi - _TOL))
        if self.kind == LENGTH:
            vals = self.allowed_values
            i = bisect_right(vals, lo + _TOL) - 1
            j = bisect_left(vals, hi - _TOL)
            return vals[max(i, 0)], vals[min(j, len(vals) - 1)]
        return lo, hi

    @classmethod
    def from_dict(cls, d: Mapping) -> "ParameterDef":
        allowed = d.get("allowed_values")
        return cls(
            name=d["name"],
            kind=d["kind"],
            lower=float(d["lower"]),
            upper=float(d["upper"]),
            allowed_values=tuple(float(v) for v in allowed) if allowed is not None else None,
            unit=d.get("unit", ""),
        )

    def to_dict(self) -> dict:
        d = {"name": self.name, "kind": self.kind, "lower": self.lower, "upper": self.upper}
        if self.allowed_values is not None:
            d["allowed_values"] = list(self.allowed_values)
        if self.unit:
            d["unit"] = self.unit
        return d


@dataclass(frozen=True)
class SearchRegion:
    """Axis-aligned box, one closed interval per parameter."""

    names: tuple[str, ...]
    intervals: tuple[tuple[float, float], ...]

    def __post_init__(self):
        object.__setattr__(self, "names", tuple(self.names))
        ivs = tuple((float(lo), float(hi)) for lo, hi in self.intervals)
        object.__setattr__(self, "intervals", ivs)
        if len(self.names) != len(ivs):
            raise RegionSchemaError("names and intervals differ in length")
        for name, (lo, hi) in zip(self.names, ivs):
            if not (math.isfinite(lo) and math.isfinite(hi)) or lo > hi:
                raise RegionSchemaError(f"{name}: invalid interval [{lo}, {hi}]")

    @classmethod
    def full(cls, defs: Sequence[ParameterDef]) -> "SearchRegion":
        return cls(tuple(d.name for d in defs), tuple((d.lower, d.upper) for d in defs))

    @property
    def lower(self) -> np.ndarray:
        return np.array([lo for lo, _ in self.intervals])

    @property
    def upper(self) -> np.ndarray:
        return np.array([hi for _, hi in self.intervals])

    @property
    def dim(self) -> int:
        return len(self.names)

    def interval(self, name: str) -> tuple[float, float]:
        return self.intervals[self.names.index(name)]

    def as_dict(self) -> dict[str, tuple[float, float]]:
        return dict(zip(self.names, self.intervals))

    def contains(self, point: "DesignPoint", tol: float = _TOL) -> bool:
        for (lo, hi), v in zip(self.intervals, point.values):
            slack = tol * max(abs(lo), abs(hi), hi - lo, 1e-300)
            if v < lo - slack or v > hi + slack:
                return False
        return True

    def volume_fraction(self, full: "SearchRegion") -> float:
        """Product of relative widths against ``full`` (zero-width axes ignored in full)."""
        frac = 1.0
        for (lo, hi), (flo, fhi) in zip(self.intervals, full.intervals):
            if fhi > flo:
                frac *= (hi - lo) / (fhi - flo)
        return frac


@dataclass(frozen=True)
class DesignPoint:
    names: tuple[str, ...]
    values: tuple

    def __post_init__(self):
        object.__setattr__(self, "names", tuple(self.names))
        object.__setattr__(self, "values", tuple(self.values))
        if len(self.names) != len(self.values):
            raise ValueError("names and values differ in length")

    def __getitem__(self, name: str):
        return self.values[self.names.index(name)]

    def as_dict(self) -> dict:
        return dict(zip(self.names, self.values))

    @classmethod
    def from_mapping(cls, defs: Sequence[ParameterDef], values: Mapping) -> "DesignPoint":
        missing = [d.name for d in defs if d.name not in values]
        if missing:
            raise RegionSchemaError(f"missing parameter values: {missing}")
        vals = []
        for d in defs:
            v = values[d.name]
            vals.append(int(v) if d.kind == FIN else float(v))
        return cls(tuple(d.name for d in defs), tuple(vals))


def validate_point(point: DesignPoint, defs: Sequence[ParameterDef]) -> None:
    if point.names != tuple(d.name for d in defs):
        raise RegionSchemaError("design point parameters do not match definitions")
    for d, v in zip(defs, point.values):
        if not d.is_legal(v):
            raise OutOfRegionError(f"{d.name}={v!r} is not a legal {d.kind} value")


@dataclass(frozen=True)
class NetlistTemplate:
    topology: str
    body: str
    constants: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self):
        if not self.topology or not self.topology.strip():
            raise ConfigError("topology name must be non-empty")

    @property
    def placeholders(self) -> set[str]:
        return set(_PLACEHOLDER.findall(self.body))

    def check(self, defs: Sequence[ParameterDef]) -> None:
        """Placeholders must be exactly the parameter names plus constants."""
        expected = {d.name for d in defs} | set(self.constants)
        found = self.placeholders
        if found != expected:
            raise TemplateError(
                f"placeholder mismatch: unused={sorted(expected - found)}, "
                f"unknown={sorted(found - expected)}",
                missing=sorted(found - expected),
            )


def format_value(value) -> str:
    """Fixed netlist formatting: integers bare, reals with 6 significant digits."""
    if isinstance(value, (int, np.integer)) and not isinstance(value, bool):
        return str(int(value))
    return f"{float(value):.5e}"


def render_netlist(template: NetlistTemplate, point: DesignPoint | None = None) -> str:
    values = dict(template.constants)
    if point is not None:
        values.update(point.as_dict())
    missing = sorted({m for m in _PLACEHOLDER.findall(template.body) if m not in values})
    if missing:
        raise TemplateError(f"unresolved placeholders: {', '.join(missing)}", missing=missing)
    return _PLACEHOLDER.sub(lambda m: format_value(values[m.group(1)]), template.body)


def clamp_region(
    proposed: SearchRegion | Mapping[str, tuple[float, float]],
    full: SearchRegion,
    defs: Sequence[ParameterDef],
    previous: SearchRegion | None = None,
) -> SearchRegion:
    """Make a proposed region legal.

    Parameters missing from ``proposed`` inherit their interval from
    ``previous`` (or ``full``).  Each interval is rounded outward onto the
    parameter grid and intersected with the full space; a proposal lying
    entirely outside the full range is replaced by the nearer half of it.
    """
    names = tuple(d.name for d in defs)
    if full.names != names:
        raise RegionSchemaError("full region does not match parameter definitions")
    prop = proposed.as_dict() if isinstance(proposed, SearchRegion) else dict(proposed)
    unknown = sorted(set(prop) - set(names))
    if unknown:
        raise RegionSchemaError(f"unknown parameters in proposed region: {unknown}")
    fallback = previous if previous is not None else full
    if fallback.names != names:
        raise RegionSchemaError("previous region does not match parameter definitions")

    out = []
    for d, (flo, fhi), (plo, phi) in zip(defs, full.intervals, fallback.intervals):
        lo, hi = prop.get(d.name, (plo, phi))
        lo, hi = float(lo), float(hi)
        if not (math.isfinite(lo) and math.isfinite(hi)):
            raise RegionSchemaError(f"{d.name}: non-finite bounds")
        if lo > hi:
            lo, hi = hi, lo
        if hi < flo or lo > fhi:
            mid = 0.5 * (flo + fhi)
            lo, hi = (mid, fhi) if lo > fhi else (flo, mid)
        lo, hi = d.outward(lo, hi)
        out.append((max(lo, flo), min(hi, fhi)))
    return SearchRegion(names, tuple(out))


def to_unit(point: DesignPoint, region: SearchRegion) -> np.ndarray:
    if point.names != region.names:
        raise RegionSchemaError("point and region parameters differ")
    if not region.contains(point):
        raise OutOfRegionError(f"point {point.as_dict()} lies outside the region")
    lo, hi = region.lower, region.upper
    v = np.asarray(point.values, dtype=float)
    width = hi - lo
    u = np.full(len(v), 0.5)
    nz = width > 0
    u[nz] = (v[nz] - lo[nz]) / width[nz]
    return np.clip(u, 0.0, 1.0)


def from_unit(u, region: SearchRegion, defs: Sequence[ParameterDef]) -> DesignPoint:
    u = np.asarray(u, dtype=float)
    if u.shape != (region.dim,):
        raise ValueError(f"expected a vector of length {region.dim}")
    if np.any(u < -_TOL) or np.any(u > 1 + _TOL):
        raise OutOfRegionError("unit coordinates must lie in [0, 1]")
    u = np.clip(u, 0.0, 1.0)
    values = []
    for d, (lo, hi), ui in zip(defs, region.intervals, u):
        raw = lo + ui * (hi - lo)
        values.append(d.snap(raw, lo, hi))
    return DesignPoint(region.names, tuple(values))


@dataclass(frozen=True)
class Benchmark:
    """A topology with its parameter definitions and netlist template."""

    name: str
    defs: tuple[ParameterDef, ...]
    template: NetlistTemplate
    surrogate: str | None = None
    testbench: Mapping = field(default_factory=dict)

    @property
    def full_region(self) -> SearchRegion:
        return SearchRegion.full(self.defs)

    @property
    def topology(self) -> str:
        return self.template.topology

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(d.name for d in self.defs)


BUILTIN_BENCHMARKS = ("two_stage", "five_t")


def load_benchmark(source: str | Path) -> Benchmark:
    """Load a technology/parameter file (JSON) by built-in id or path."""
    source = str(source)
    if source in BUILTIN_BENCHMARKS:
        base = resources.files("ledro") / "benchmarks"
        text = (base / f"{source}.json").read_text()
        data = json.loads(text)
        template_text = (base / data["template"]).read_text()
    else:
        path = Path(source)
        if not path.exists():
            raise ConfigError(f"benchmark file not found: {path}")
        data = json.loads(path.read_text())
        template_text = (path.parent / data["template"]).read_text()
    return benchmark_from_dict(data, template_text)


def benchmark_from_dict(data: Mapping, template_text: str) -> Benchmark:
    for key in ("name", "topology", "parameters"):
        if key not in data:
            raise ConfigError(f"benchmark file missing {key!r}")
    defs = tuple(ParameterDef.from_dict(p) for p in data["parameters"])
    names = [d.name for d in defs]
    if len(set(names)) != len(names):
        raise ConfigError("duplicate parameter names")
    template = NetlistTemplate(
        topology=data["topology"],
        body=template_text,
        constants={k: v for k, v in data.get("constants", {}).items()},
    )
    template.check(defs)
    return Benchmark(
        name=data["name"],
        defs=defs,
        template=template,
        surrogate=data.get("surrogate"),
        testbench=dict(data.get("testbench", {})),
    )


def region_from_mapping(defs: Sequence[ParameterDef], intervals: Mapping) -> SearchRegion:
    return SearchRegion(tuple(d.name for d in defs), tuple(tuple(intervals[d.name]) for d in defs))
