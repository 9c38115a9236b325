"""Figure-of-Merit objective for Op-Amp sizing.

Each specification is normalized against a boundary value with
``phi(s, b) = (s - b) / (s + b)`` and capped at zero in the direction that
favours the spec, so that the weighted sum never exceeds zero.  A design that
meets or beats every bound scores exactly 0.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, fields

from .errors import DegenerateNormalizerError, InvalidSpecError

MAXIMIZE = "maximize"
MINIMIZE = "minimize"

SPEC_NAMES = ("gain", "ugbw", "phase_margin", "supply_current")
SPEC_UNITS = {"gain": "dB", "ugbw": "Hz", "phase_margin": "deg", "supply_current": "A"}
DIRECTIONS = {
    "gain": MAXIMIZE,
    "ugbw": MAXIMIZE,
    "phase_margin": MAXIMIZE,
    "supply_current": MINIMIZE,
}


@dataclass(frozen=True)
class SpecSet:
    """Measured amplifier specifications (dB, Hz, degrees, amperes)."""

    gain: float
    ugbw: float
    phase_margin: float
    supply_current: float

    def __post_init__(self):
        for f in fields(self):
            value = getattr(self, f.name)
            if not math.isfinite(value):
                raise InvalidSpecError(f"{f.name} must be finite, got {value!r}")
        if self.supply_current < 0:
            raise InvalidSpecError(f"supply_current must be >= 0, got {self.supply_current!r}")
        if not -180.0 <= self.phase_margin <= 360.0:
            raise InvalidSpecError(
                f"phase_margin must lie in [-180, 360] degrees, got {self.phase_margin!r}"
            )

    def as_dict(self) -> dict[str, float]:
        return {name: getattr(self, name) for name in SPEC_NAMES}


@dataclass(frozen=True)
class SpecBounds:
    gain: float
    ugbw: float
    phase_margin: float
    supply_current: float

    def __post_init__(self):
        for name in SPEC_NAMES:
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise InvalidSpecError(f"bound for {name} must be finite and > 0, got {value!r}")

    def direction(self, name: str) -> str:
        return DIRECTIONS[name]

    def as_dict(self) -> dict[str, float]:
        return {name: getattr(self, name) for name in SPEC_NAMES}


@dataclass(frozen=True)
class FomWeights:
    gain: float = 3.0
    ugbw: float = 1.0
    phase_margin: float = 1.0
    supply_current: float = -1.0

    def __post_init__(self):
        for name in SPEC_NAMES:
            w = getattr(self, name)
            if DIRECTIONS[name] == MAXIMIZE and not w > 0:
                raise InvalidSpecError(f"weight for maximized spec {name} must be > 0")
            if DIRECTIONS[name] == MINIMIZE and not w < 0:
                raise InvalidSpecError(f"weight for minimized spec {name} must be < 0")

    def as_dict(self) -> dict[str, float]:
        return {name: getattr(self, name) for name in SPEC_NAMES}


LOW_COMPLEXITY_BOUNDS = SpecBounds(gain=50.0, ugbw=5e6, phase_margin=70.0, supply_current=5e-6)
HIGH_COMPLEXITY_BOUNDS = SpecBounds(gain=70.0, ugbw=20e6, phase_margin=70.0, supply_current=10e-6)
DEFAULT_WEIGHTS = FomWeights()

BOUNDS_PRESETS = {"low": LOW_COMPLEXITY_BOUNDS, "high": HIGH_COMPLEXITY_BOUNDS}


def normalize(s: float, s_bound: float, direction: str = MAXIMIZE) -> float:
    """Capped normalized distance of ``s`` from its boundary value.

    Maximized specs return ``min(0, phi)``; minimized specs return
    ``max(0, phi)`` (their weight is negative).  Maximized values below zero
    are floored at zero first, which keeps ``phi`` in ``[-1, 0]``.
    """
    if not math.isfinite(s):
        raise InvalidSpecError(f"spec value must be finite, got {s!r}")
    if not (math.isfinite(s_bound) and s_bound > 0):
        raise InvalidSpecError(f"boundary value must be finite and > 0, got {s_bound!r}")
    if direction == MAXIMIZE:
        s = max(s, 0.0)
    elif direction != MINIMIZE:
        raise ValueError(f"unknown direction {direction!r}")
    denom = s + s_bound
    if denom == 0:
        raise DegenerateNormalizerError(f"s + s_bound == 0 for s={s!r}, s_bound={s_bound!r}")
    phi = (s - s_bound) / denom
    return min(0.0, phi) if direction == MAXIMIZE else max(0.0, phi)


def fom_terms(specs: SpecSet, bounds: SpecBounds, weights: FomWeights) -> dict[str, float]:
    """Per-spec weighted contributions; each is <= 0."""
    terms = {}
    for name in SPEC_NAMES:
        try:
            phi = normalize(getattr(specs, name), getattr(bounds, name), DIRECTIONS[name])
        except (InvalidSpecError, DegenerateNormalizerError) as exc:
            raise type(exc)(f"{name}: {exc}") from exc
        terms[name] = getattr(weights, name) * phi
    return terms


def fom(specs: SpecSet, bounds: SpecBounds, weights: FomWeights = DEFAULT_WEIGHTS) -> float:
    """Weighted sum of capped normalized specs.  Always <= 0."""
    terms = fom_terms(specs, bounds, weights)
    return math.fsum(terms[name] for name in SPEC_NAMES)


def is_good_point(specs: SpecSet | None, gain_threshold: float = 0.0) -> bool:
    """True iff the gain strictly exceeds ``gain_threshold`` (dB)."""
    return specs is not None and specs.gain > gain_threshold
