"""Map design points to evaluation records through a pluggable simulator backend."""
from __future__ import annotations

import logging
import time
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Protocol, Sequence

from .design_space import Benchmark, DesignPoint, validate_point
from .errors import InvalidSpecError, SimulationError, SpiceParseError
from .fom import DEFAULT_WEIGHTS, FomWeights, SpecBounds, SpecSet, fom
from .records import EvaluationRecord, TransistorTelemetry
from . import surrogate

log = logging.getLogger(__name__)

FAILURE_PENALTY = -4.0


class Backend(Protocol):
    def simulate(self, point: DesignPoint) -> tuple[SpecSet, Sequence[TransistorTelemetry]]: ...


class SurrogateBackend:
    """Closed-form Op-Amp model named by the benchmark's ``surrogate`` field."""

    def __init__(self, benchmark: Benchmark, model: str | None = None):
        self.benchmark = benchmark
        self.model = model or benchmark.surrogate
        if self.model not in surrogate.MODELS:
            raise SimulationError(f"benchmark {benchmark.name!r} has no surrogate model")
        self.constants = dict(benchmark.template.constants)

    def simulate(self, point: DesignPoint):
        return surrogate.simulate(self.model, point.as_dict(), self.constants)


class CircuitEvaluator:
    """Scores design points with the FoM; failures get ``penalty`` instead of raising."""

    def __init__(
        self,
        benchmark: Benchmark,
        bounds: SpecBounds,
        weights: FomWeights = DEFAULT_WEIGHTS,
        backend: Backend | None = None,
        parallelism: int = 1,
        penalty: float = FAILURE_PENALTY,
    ):
        if parallelism < 1:
            raise ValueError("parallelism must be >= 1")
        self.benchmark = benchmark
        self.bounds = bounds
        self.weights = weights
        self.backend = backend or SurrogateBackend(benchmark)
        self.parallelism = parallelism
        self.penalty = penalty

    def score(self, specs: SpecSet) -> float:
        return fom(specs, self.bounds, self.weights)

    def evaluate(self, point: DesignPoint) -> EvaluationRecord:
        validate_point(point, self.benchmark.defs)
        start = time.perf_counter()
        try:
            specs, telemetry = self.backend.simulate(point)
            value = self.score(specs)
        except (SimulationError, SpiceParseError, InvalidSpecError) as exc:
            log.warning("simulation failed for %s: %s", point.as_dict(), exc)
            extra = {"raw_output": exc.raw} if isinstance(exc, SpiceParseError) else {}
            return EvaluationRecord(
                point=point,
                specs=None,
                fom=self.penalty,
                failed=True,
                error=str(exc),
                wall_time=time.perf_counter() - start,
                extra=extra,
            )
        return EvaluationRecord(
            point=point,
            specs=specs,
            fom=value,
            telemetry=tuple(telemetry),
            wall_time=time.perf_counter() - start,
        )

    def evaluate_batch(self, points: Sequence[DesignPoint], parallelism: int | None = None) -> list[EvaluationRecord]:
        return evaluate_batch(self.evaluate, points, parallelism or self.parallelism)


def evaluate_batch(fn: Callable[[DesignPoint], EvaluationRecord], points, parallelism: int = 1):
    """Evaluate in input order; ``parallelism`` > 1 uses a thread pool."""
    if parallelism < 1:
        raise ValueError("parallelism must be >= 1")
    points = list(points)
    if parallelism == 1 or len(points) <= 1:
        return [fn(p) for p in points]
    with ThreadPoolExecutor(max_workers=parallelism) as pool:
        return list(pool.map(fn, points))


class FunctionEvaluator:
    """Wraps a plain objective ``f(values) -> float`` (maximized) as an evaluator."""

    def __init__(self, fn: Callable[[tuple], float]):
        self.fn = fn

    def evaluate(self, point: DesignPoint) -> EvaluationRecord:
        return EvaluationRecord(point=point, specs=None, fom=float(self.fn(point.values)))

    def evaluate_batch(self, points, parallelism: int = 1):
        return evaluate_batch(self.evaluate, points, parallelism)
