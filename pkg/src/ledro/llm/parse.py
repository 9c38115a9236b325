"""Turn free-form model answers into search regions.

Accepted range forms, one per line after a parameter name::

    nfin_in: 10 to 30
    ibias: [1e-6, 2e-6]
    vcm = 0.3 – 0.45 V
    vcm between 0.3 and 0.45
    **l_in** (gate length): 14 nm to 30 nm

Numbers may carry a unit with an SI prefix; it is converted into the
parameter's own unit.  When a parameter appears several times the last
occurrence wins, so a model that revises itself mid-answer is read at its
final word.
"""
from __future__ import annotations

import re
from typing import Sequence

from ..design_space import ParameterDef, SearchRegion, clamp_region
from ..errors import RegionParseFailure

_NUM = r"[-+]?(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][-+]?\d+)?"
_UNIT = r"(?:(?!(?:to|and)\b)[A-Za-zµμΩ]{1,5}\b)"
_SEP = r"(?:\s+to\s+|\s+and\s+|\s*[–—]\s*|\s*\.\.\s*)"
_RANGE = re.compile(
    rf"(?:(?P<a>{_NUM})\s*(?P<ua>{_UNIT})?{_SEP}(?P<b>{_NUM})\s*(?P<ub>{_UNIT})?"
    rf"|\[\s*(?P<c>{_NUM})\s*(?P<uc>{_UNIT})?\s*,\s*(?P<d>{_NUM})\s*(?P<ud>{_UNIT})?\s*\]\s*(?P<ue>{_UNIT})?)"
)
# decoration allowed between a parameter name and its range
_LEAD = re.compile(r"[\s*`_]*(?:\([^)]*\))?[\s*`_]*(?::|=|\bfrom\b|\bin\b|\bbetween\b)?[\s*`_]*(?:from\s+|between\s+)?")

_PREFIX = {"f": 1e-15, "p": 1e-12, "n": 1e-9, "u": 1e-6, "µ": 1e-6, "μ": 1e-6, "m": 1e-3, "k": 1e3, "M": 1e6, "G": 1e9}
_BASES = ("Hz", "A", "V", "F", "m", "s", "Ω")
_COUNT_UNITS = {"fin", "fins"}


def _unit_factor(unit: str) -> tuple[float, str] | None:
    """``(factor, base)`` for an SI unit string, or None if not recognised."""
    if unit.lower() in _COUNT_UNITS:
        return 1.0, "fins"
    for base in _BASES:
        if unit == base:
            return 1.0, base
        if unit.endswith(base) and len(unit) == len(base) + 1 and unit[0] in _PREFIX:
            return _PREFIX[unit[0]], base
    return None


def _convert(value: float, unit: str | None, target: str) -> float | None:
    """Express ``value [unit]`` in ``target`` units; None when the units clash."""
    given = _unit_factor(unit) if unit else None
    if given is None:
        return value  # no unit, or an ordinary word after the number
    if not target:
        return value if given[0] == 1.0 else None
    want = _unit_factor(target)
    if want is None or want[1] != given[1]:
        return None
    return value * given[0] / want[0]


def _range_after(text: str, d: ParameterDef) -> tuple[float, float] | None:
    lead = _LEAD.match(text)
    rest = text[lead.end():] if lead else text
    m = _RANGE.match(rest)
    if not m:
        return None
    if m.group("a") is not None:
        a, b = float(m.group("a")), float(m.group("b"))
        ua, ub = m.group("ua"), m.group("ub")
    else:
        a, b = float(m.group("c")), float(m.group("d"))
        ua = m.group("uc") or m.group("ue")
        ub = m.group("ud") or m.group("ue")
    ua = ua or ub
    lo, hi = _convert(a, ua, d.unit), _convert(b, ub, d.unit)
    if lo is None or hi is None:
        return None
    return (lo, hi) if lo <= hi else (hi, lo)


def extract_ranges(response: str, defs: Sequence[ParameterDef]) -> dict[str, tuple[float, float]]:
    """Raw per-parameter ranges found in ``response`` (no clamping)."""
    found: dict[str, tuple[float, float]] = {}
    names = sorted(defs, key=lambda d: -len(d.name))
    patterns = [(d, re.compile(rf"(?<![A-Za-z0-9_]){re.escape(d.name)}(?![A-Za-z0-9_])")) for d in names]
    for line in response.splitlines():
        hits = []
        for d, pat in patterns:
            for m in pat.finditer(line):
                hits.append((m.start(), m.end(), d))
        hits.sort(key=lambda h: h[0])
        for start, end, d in hits:
            r = _range_after(line[end:], d)
            if r is not None:
                found.pop(d.name, None)
                found[d.name] = r
    return found


def parse_region(
    response: str,
    defs: Sequence[ParameterDef],
    full: SearchRegion,
    previous: SearchRegion | None = None,
) -> SearchRegion:
    """Parse and clamp; parameters not mentioned keep ``previous`` (or the full range)."""
    if not response or not response.strip():
        raise RegionParseFailure("empty response", response=response or "")
    ranges = extract_ranges(response, defs)
    if not ranges:
        raise RegionParseFailure("no parameter ranges found in response", response=response)
    return clamp_region(ranges, full, defs, previous=previous)
