"""LLM-guided search-space reduction with trust-region Bayesian optimization for analog sizing."""
from .calibration import CalibrationSet, synthesize
from .design_space import (
    Benchmark,
    DesignPoint,
    NetlistTemplate,
    ParameterDef,
    SearchRegion,
    clamp_region,
    from_unit,
    load_benchmark,
    render_netlist,
    to_unit,
)
from .errors import LedroError
from .evaluator import CircuitEvaluator, SurrogateBackend
from .fom import (
    HIGH_COMPLEXITY_BOUNDS,
    LOW_COMPLEXITY_BOUNDS,
    FomWeights,
    SpecBounds,
    SpecSet,
    fom,
    is_good_point,
    normalize,
)
from .orchestrator import RunConfig, RunReport, compare_runs, run_baseline, run_ledro, steps_to_target
from .records import EvaluationRecord, TransistorTelemetry

__version__ = "0.1.0"

__all__ = [
    "Benchmark",
    "CalibrationSet",
    "CircuitEvaluator",
    "DesignPoint",
    "EvaluationRecord",
    "FomWeights",
    "HIGH_COMPLEXITY_BOUNDS",
    "LOW_COMPLEXITY_BOUNDS",
    "LedroError",
    "NetlistTemplate",
    "ParameterDef",
    "RunConfig",
    "RunReport",
    "SearchRegion",
    "SpecBounds",
    "SpecSet",
    "SurrogateBackend",
    "TransistorTelemetry",
    "clamp_region",
    "compare_runs",
    "fom",
    "from_unit",
    "is_good_point",
    "load_benchmark",
    "normalize",
    "render_netlist",
    "run_baseline",
    "run_ledro",
    "steps_to_target",
    "synthesize",
    "to_unit",
]
