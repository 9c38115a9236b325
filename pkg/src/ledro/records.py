"""Evaluation records and per-device telemetry."""
from __future__ import annotations

from dataclasses import dataclass, field, replace

from .design_space import DesignPoint
from .fom import SpecSet

REGIONS = ("cutoff", "subthreshold", "saturation", "linear")

CALIBRATION = "calibration"
BASELINE = "baseline"


def round_phase(k: int) -> str:
    return f"ledro-round-{k}"


@dataclass(frozen=True)
class TransistorTelemetry:
    """Operating point of one device.  PMOS quantities are reported as magnitudes."""

    device: str
    region: str
    v_gs: float
    v_ds: float
    g_m: float
    i_ds: float

    def __post_init__(self):
        if self.region not in REGIONS:
            raise ValueError(f"unknown region {self.region!r}")
        if self.region in ("saturation", "linear") and self.i_ds < 0:
            raise ValueError(f"{self.device}: negative drain current in {self.region}")


@dataclass(frozen=True)
class EvaluationRecord:
    point: DesignPoint
    specs: SpecSet | None
    fom: float
    telemetry: tuple[TransistorTelemetry, ...] = ()
    phase: str = ""
    step: int = -1
    wall_time: float = 0.0
    failed: bool = False
    error: str = ""
    extra: dict = field(default_factory=dict, compare=False)

    def stamped(self, step: int, phase: str) -> "EvaluationRecord":
        return replace(self, step=step, phase=phase)

    def regions(self) -> dict[str, str]:
        return {t.device: t.region for t in self.telemetry}
