"""Prompt builders.  Every function here is a pure text function of its inputs."""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Sequence

from ..design_space import FIN, NetlistTemplate, ParameterDef, SearchRegion
from ..fom import DIRECTIONS, SPEC_NAMES, SPEC_UNITS, FomWeights, SpecBounds
from ..records import EvaluationRecord

REFLECTION_HEADER = "## Notes from your earlier reflection"
POSITIVE_TEXT = "The optimizer did well inside the ranges you proposed last time."
NEGATIVE_TEXT = "The ranges you proposed last time gave poor results."
EXPLORE_TEXT = "Move to a new and different region of the design space for the next attempt."
REFLECTION_MARKER = "Summarize what these rounds tell you"
FORMAT_REMINDER = "Your previous answer did not contain any ranges I could read."

_SPEC_LABELS = {
    "gain": "DC gain",
    "ugbw": "unity-gain bandwidth",
    "phase_margin": "phase margin",
    "supply_current": "supply current",
}
_PLACEHOLDER = re.compile(r"\{([A-Za-z_][A-Za-z0-9_]*)\}")


def fmt(value) -> str:
    """Short stable number formatting for prompt text."""
    if isinstance(value, int) and not isinstance(value, bool):
        return str(value)
    value = float(value)
    if value == int(value) and abs(value) < 1e6:
        return str(int(value))
    return f"{value:.6g}"


def estimate_tokens(text: str) -> int:
    return math.ceil(len(text) / 4)


def format_contract(defs: Sequence[ParameterDef]) -> str:
    example = defs[0]
    unit = f" {example.unit}" if example.unit and example.kind != FIN else ""
    return (
        "Answer format: give one line per parameter, exactly\n"
        "<parameter name>: <low> to <high>\n"
        f"for example `{example.name}: {fmt(example.lower)} to {fmt(example.upper)}{unit}`. "
        "Use the parameter names and units listed above. Any parameter you leave out keeps its current range."
    )


def verbalize_fom(bounds: SpecBounds, weights: FomWeights) -> str:
    lines = [
        "Designs are scored with a figure of merit (FoM). For each specification s with target b we take "
        "phi = (s - b) / (s + b).",
        "A specification that should be large contributes only when it falls short of its target "
        "(phi is capped at 0 from above); the supply current contributes only when it exceeds its budget.",
        "The FoM is the weighted sum of these terms:",
    ]
    for name in SPEC_NAMES:
        w = getattr(weights, name)
        lines.append(f"  {_SPEC_LABELS[name]}: weight {fmt(w)}")
    lines.append("The best possible FoM is 0, reached when every target is met. Higher is better.")
    return "\n".join(lines)


def _template_text(template: NetlistTemplate) -> str:
    consts = template.constants
    return _PLACEHOLDER.sub(
        lambda m: fmt(consts[m.group(1)]) if m.group(1) in consts else m.group(0), template.body
    ).rstrip("\n")


def build_system_prompt(template: NetlistTemplate, topology: str, bounds: SpecBounds, weights: FomWeights) -> str:
    if not topology or not topology.strip():
        raise ValueError("topology name must be non-empty")
    lines = [
        "You are an analog circuit designer helping an optimizer size a FinFET operational amplifier.",
        f"Topology: {topology}",
        "",
        "Netlist (sizing parameters appear as {name} placeholders):",
        "```",
        _template_text(template),
        "```",
        "",
        "Specification targets:",
    ]
    for name in SPEC_NAMES:
        goal = "at least" if DIRECTIONS[name] == "maximize" else "at most"
        lines.append(f"  {_SPEC_LABELS[name]}: {goal} {fmt(getattr(bounds, name))} {SPEC_UNITS[name]}")
    lines += ["", verbalize_fom(bounds, weights), ""]
    lines.append(
        "Each round you propose a smaller range for every sizing parameter. "
        "An optimizer then searches only inside your ranges and reports back."
    )
    return "\n".join(lines) + "\n"


def _param_text(d: ParameterDef, value) -> str:
    unit = f" {d.unit}" if d.unit and d.kind != FIN else ""
    return f"{d.name}={fmt(value)}{unit}"


def design_block(index: int, record: EvaluationRecord, defs: Sequence[ParameterDef]) -> str:
    s = record.specs
    lines = [f"Design {index} (FoM {record.fom:.6g})"]
    lines.append("  parameters: " + ", ".join(_param_text(d, record.point[d.name]) for d in defs))
    if s is not None:
        lines.append(
            f"  specs: gain {s.gain:.4g} dB, UGBW {s.ugbw:.4g} Hz, "
            f"phase margin {s.phase_margin:.4g} deg, supply current {s.supply_current:.4g} A"
        )
    if record.telemetry:
        lines.append("  regions: " + ", ".join(f"{t.device} {t.region}" for t in record.telemetry))
    return "\n".join(lines)


def _design_section(records: Sequence[EvaluationRecord], defs, budget_tokens: int | None) -> list[str]:
    """Blocks in descending FoM; lowest-FoM blocks are dropped to fit ``budget_tokens``."""
    ordered = sorted(records, key=lambda r: (-r.fom, r.step))
    blocks = [design_block(i + 1, r, defs) for i, r in enumerate(ordered)]
    if budget_tokens is not None:
        while len(blocks) > 1 and estimate_tokens("\n\n".join(blocks)) > budget_tokens:
            blocks.pop()
    return blocks


def full_ranges(defs: Sequence[ParameterDef]) -> str:
    lines = []
    for d in defs:
        if d.kind == FIN:
            lines.append(f"  {d.name}: integer fin count, {fmt(d.lower)} to {fmt(d.upper)}")
        elif d.allowed_values:
            allowed = ", ".join(fmt(v) for v in d.allowed_values)
            lines.append(f"  {d.name}: gate length in {d.unit or 'model units'}, one of {allowed}")
        else:
            lines.append(f"  {d.name}: {fmt(d.lower)} to {fmt(d.upper)} {d.unit}".rstrip())
    return "\n".join(lines)


def build_first_round_prompt(
    selected: Sequence[EvaluationRecord],
    bounds: SpecBounds,
    defs: Sequence[ParameterDef],
    token_ceiling: int | None = None,
) -> str:
    if not selected:
        raise ValueError("first-round prompt needs at least one calibrated design")
    head = [
        "Here are the best designs found by a short optimizer run over the whole design space, "
        "with their specifications, FoM and the operating region of every transistor.",
        "",
    ]
    tail = [
        "",
        "Full parameter ranges:",
        full_ranges(defs),
        "",
        "Use these designs and the device operating regions to narrow the search space. "
        "Keep ranges wide enough to contain the promising designs, and steer devices "
        "that sit in the wrong region toward saturation.",
        "",
        format_contract(defs),
    ]
    budget = None
    if token_ceiling is not None:
        budget = token_ceiling - estimate_tokens("\n".join(head + tail))
    blocks = _design_section(selected, defs, budget)
    return "\n".join(head + ["\n\n".join(blocks)] + tail) + "\n"


def reflection_section(reflection: str | None) -> list[str]:
    if not reflection:
        return []
    return ["", REFLECTION_HEADER, reflection.strip()]


def build_followup_prompt(
    verdict,
    good_records: Sequence[EvaluationRecord],
    defs: Sequence[ParameterDef],
    reflection: str | None = None,
    token_ceiling: int | None = None,
) -> str:
    """Prompt for the next round.  ``verdict=None`` gives the neutral prompt used with feedback off."""
    tail = reflection_section(reflection) + ["", format_contract(defs)]
    if verdict is None:
        body = ["Propose refined ranges for the next optimizer run."]
    elif not verdict.positive:
        body = [
            NEGATIVE_TEXT,
            f"Only {verdict.good_count} designs had gain above the threshold and the best FoM "
            f"did not improve on {verdict.prior_best:.6g}.",
            EXPLORE_TEXT,
        ]
    else:
        head = [
            POSITIVE_TEXT,
            f"It found {verdict.good_count} designs with gain above the threshold and raised the best FoM "
            f"to {verdict.best_fom:.6g}. The good designs were:",
            "",
        ]
        closing = ["", "Refine the ranges further around what worked."]
        budget = None
        if token_ceiling is not None:
            budget = token_ceiling - estimate_tokens("\n".join(head + closing + tail))
        body = head + ["\n\n".join(_design_section(good_records, defs, budget))] + closing
    return "\n".join(body + tail) + "\n"


def render_region(region: SearchRegion, defs: Sequence[ParameterDef]) -> str:
    """Region in the answer format, with exact (repr) numbers."""
    lines = []
    for d, (lo, hi) in zip(defs, region.intervals):
        if d.kind == FIN:
            lines.append(f"{d.name}: {int(lo)} to {int(hi)}")
        else:
            lines.append(f"{d.name}: {lo!r} to {hi!r}")
    return "\n".join(lines)


@dataclass(frozen=True)
class RoundSummary:
    round: int
    region: SearchRegion
    verdict: object  # FeedbackVerdict


def build_reflection_prompt(history: Sequence[RoundSummary], defs: Sequence[ParameterDef]) -> str:
    if not history:
        raise ValueError("reflection needs at least one completed round")
    lines = ["Here are the ranges you proposed so far and how the optimizer did with them.", ""]
    for h in history:
        v = h.verdict
        label = "positive" if v.positive else "negative"
        lines.append(
            f"Round {h.round}: {label} ({v.good_count} good designs, best FoM {v.best_fom:.6g})"
        )
        lines += ["  " + line for line in render_region(h.region, defs).splitlines()]
    lines += [
        "",
        f"{REFLECTION_MARKER}: which ranges helped, which did not, and what strategy you will follow next. "
        "Keep it short and do not propose new ranges yet.",
    ]
    return "\n".join(lines) + "\n"
