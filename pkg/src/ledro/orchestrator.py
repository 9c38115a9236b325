"""End-to-end loop, baseline protocol, comparison metrics and run persistence."""
from __future__ import annotations

import json
import logging
import math
import time
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Sequence

import numpy as np

from . import calibration, turbo
from .design_space import Benchmark, SearchRegion, load_benchmark
from .errors import ComparisonError, ConfigError, GoodPointsNotFound, LedroError, RegionParseFailure
from .evaluator import FAILURE_PENALTY, CircuitEvaluator, SurrogateBackend
from .fom import BOUNDS_PRESETS, SPEC_NAMES, FomWeights, SpecBounds
from .gp import FitSchedule
from .llm import (
    LlmClientConfig,
    RoundSummary,
    build_first_round_prompt,
    build_followup_prompt,
    build_reflection_prompt,
    build_system_prompt,
    classify_feedback,
    good_records,
    make_client,
    parse_region,
)
from .llm.prompts import FORMAT_REMINDER, format_contract
from .llm.transcript import NONE, RoundTranscript
from .records import BASELINE, CALIBRATION, EvaluationRecord, round_phase
from .runlog import CHECKPOINT_FILE, CONFIG_FILE, REPORT_FILE, RunDirectory
from .spice import SpiceBackend, SpiceConfig

log = logging.getLogger(__name__)

BASELINE_MODES = {"none": None, "bo-1200": 1200, "bo-2000": 2000}
ABLATIONS = ("no-feedback", "no-reflection")

# Seed splitting: every phase draws from SeedSequence(root, spawn_key=key).
SEED_SCHEME = "SeedSequence(root, spawn_key=key).generate_state(1)[0]; keys: calibration (0,), round r (1, r), baseline repeat i (2, i)"


def derive_seed(root: int, *key: int) -> int:
    return int(np.random.SeedSequence(root, spawn_key=tuple(key)).generate_state(1)[0])


def calibration_seed(root: int) -> int:
    return derive_seed(root, 0)


def round_seed(root: int, r: int) -> int:
    return derive_seed(root, 1, r)


def repeat_seed(root: int, i: int) -> int:
    return derive_seed(root, 2, i)


@dataclass
class RunConfig:
    benchmark: str = "two_stage"
    bounds: str | dict = "low"
    weights: dict = field(default_factory=lambda: FomWeights().as_dict())
    iterations: int = 10
    inner_budget: int = 100
    calibration_budget: int = 200
    seed: int = 0
    evaluator: dict = field(default_factory=lambda: {"backend": "surrogate"})
    parallelism: int = 1
    llm: dict = field(default_factory=lambda: {"backend": "scripted", "script": "oracle:halving"})
    feedback: bool = True
    reflection: bool = True
    baseline: str = "none"
    baseline_steps: int | None = None
    repeats: int = 5
    gain_threshold: float = 0.0
    top_k: int = 5
    calibration_retries: int = 2
    prompt_token_ceiling: int | None = 6000
    penalty: float = FAILURE_PENALTY
    turbo: dict = field(default_factory=dict)
    base_dir: str | None = field(default=None, compare=False)

    @classmethod
    def from_dict(cls, d, base_dir=None) -> "RunConfig":
        unknown = set(d) - set(cls.__dataclass_fields__) - {"base_dir"}
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        cfg = cls(**{k: v for k, v in d.items() if k != "base_dir"})
        cfg.base_dir = str(base_dir) if base_dir is not None else d.get("base_dir")
        return cfg

    @classmethod
    def load(cls, path) -> "RunConfig":
        path = Path(path)
        try:
            data = json.loads(path.read_text())
        except (OSError, ValueError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        return cls.from_dict(data, base_dir=path.parent.resolve())

    def to_dict(self) -> dict:
        d = asdict(self)
        d.pop("base_dir")
        return d

    def path(self, p: str) -> str:
        if self.base_dir and not Path(p).is_absolute() and (Path(self.base_dir) / p).exists():
            return str(Path(self.base_dir) / p)
        return p

    def spec_bounds(self) -> SpecBounds:
        if isinstance(self.bounds, str):
            if self.bounds not in BOUNDS_PRESETS:
                raise ConfigError(f"unknown bounds preset {self.bounds!r}; use low, high or a mapping")
            return BOUNDS_PRESETS[self.bounds]
        missing = set(SPEC_NAMES) - set(self.bounds)
        if missing:
            raise ConfigError(f"custom bounds missing {sorted(missing)}")
        return SpecBounds(**{k: float(self.bounds[k]) for k in SPEC_NAMES})

    def fom_weights(self) -> FomWeights:
        try:
            return FomWeights(**{k: float(v) for k, v in self.weights.items()})
        except TypeError as exc:
            raise ConfigError(f"bad weights: {exc}") from exc

    def llm_config(self) -> LlmClientConfig:
        return LlmClientConfig.from_dict(self.llm)

    def turbo_config(self) -> turbo.TurboConfig:
        opts = dict(self.turbo)
        fit = opts.pop("fit", None)
        unknown = set(opts) - set(turbo.TurboConfig.__dataclass_fields__)
        if unknown:
            raise ConfigError(f"unknown turbo settings: {sorted(unknown)}")
        cfg = turbo.TurboConfig(**opts)
        if fit is not None:
            cfg.fit = FitSchedule(**fit)
        return cfg

    def baseline_budget(self, steps: int | None = None) -> int:
        if steps is not None:
            return int(steps)
        if self.baseline_steps is not None:
            return int(self.baseline_steps)
        if self.baseline not in BASELINE_MODES:
            raise ConfigError(f"unknown baseline mode {self.baseline!r}")
        if BASELINE_MODES[self.baseline] is None:
            raise ConfigError("no baseline configured; set baseline or pass steps")
        return BASELINE_MODES[self.baseline]

    def load_benchmark(self) -> Benchmark:
        return load_benchmark(self.path(self.benchmark))

    def validate(self) -> Benchmark:
        """Check everything that can be checked without running; returns the benchmark."""
        bench = self.load_benchmark()
        self.spec_bounds()
        self.fom_weights()
        self.llm_config()
        n_init = self.turbo_config().resolve(len(bench.defs)).n_init
        if self.iterations < 1:
            raise ConfigError("iterations must be >= 1")
        for name in ("inner_budget", "calibration_budget"):
            if getattr(self, name) < n_init:
                raise ConfigError(f"{name} must be at least the optimizer's initial design size ({n_init})")
        if self.repeats < 1:
            raise ConfigError("repeats must be >= 1")
        if self.parallelism < 1:
            raise ConfigError("parallelism must be >= 1")
        if self.top_k < 1:
            raise ConfigError("top_k must be >= 1")
        if self.baseline not in BASELINE_MODES:
            raise ConfigError(f"unknown baseline mode {self.baseline!r}")
        if self.baseline_steps is not None and self.baseline_steps < self.calibration_budget:
            raise ConfigError("baseline_steps must cover the calibration budget")
        if self.evaluator.get("backend") not in ("surrogate", "spice"):
            raise ConfigError("evaluator backend must be surrogate or spice")
        return bench


def with_ablation(config: RunConfig, name: str) -> RunConfig:
    """``no-feedback`` runs a single refined round; ``no-reflection`` drops the reflection step."""
    if name == "no-feedback":
        return replace(config, feedback=False, iterations=1)
    if name == "no-reflection":
        return replace(config, reflection=False)
    raise ConfigError(f"unknown ablation {name!r}; choose from {ABLATIONS}")


def make_evaluator(config: RunConfig, bench: Benchmark) -> CircuitEvaluator:
    opts = dict(config.evaluator)
    backend_name = opts.pop("backend", "surrogate")
    if backend_name == "surrogate":
        if opts:
            raise ConfigError(f"surrogate backend takes no settings: {sorted(opts)}")
        backend = SurrogateBackend(bench)
    elif backend_name == "spice":
        backend = SpiceBackend(bench, SpiceConfig.from_dict(opts))
    else:
        raise ConfigError(f"unknown evaluator backend {backend_name!r}")
    return CircuitEvaluator(
        bench, config.spec_bounds(), config.fom_weights(), backend=backend,
        parallelism=config.parallelism, penalty=config.penalty,
    )


# --------------------------------------------------------------------------- reports

@dataclass
class RunReport:
    kind: str
    benchmark: str
    bounds: dict
    weights: dict
    seed: int
    status: str
    phase_counts: dict
    trajectory: list
    best_fom: float
    best_step: int
    best_point: dict
    best_specs: dict | None
    transcripts: list = field(default_factory=list)
    rounds: list = field(default_factory=list)
    repeats: list = field(default_factory=list)
    best_repeat: int | None = None
    metrics: dict = field(default_factory=dict)
    seed_scheme: str = SEED_SCHEME
    wall_time: dict = field(default_factory=dict, compare=False)

    @property
    def total_evaluations(self) -> int:
        return sum(self.phase_counts.values())

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d) -> "RunReport":
        return cls(**d)

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n")

    @classmethod
    def load(cls, path) -> "RunReport":
        return cls.from_dict(json.loads(Path(path).read_text()))


def phase_counts(records: Sequence[EvaluationRecord]) -> dict:
    counts: dict[str, int] = {}
    for r in records:
        counts[r.phase] = counts.get(r.phase, 0) + 1
    return counts


def trajectory(records: Sequence[EvaluationRecord]) -> list:
    return [float(v) for v in turbo.best_so_far([r.fom for r in records])] if records else []


def _best(records: Sequence[EvaluationRecord]) -> EvaluationRecord:
    return min(records, key=lambda r: (-r.fom, r.step))


def _report(kind, config, records, status, transcripts=(), rounds=(), traj_records=None, wall=None, **extra):
    traj_records = records if traj_records is None else traj_records
    best = _best(traj_records)
    return RunReport(
        kind=kind,
        benchmark=config.benchmark,
        bounds=config.spec_bounds().as_dict(),
        weights=config.fom_weights().as_dict(),
        seed=config.seed,
        status=status,
        phase_counts=phase_counts(records),
        trajectory=trajectory(traj_records),
        best_fom=best.fom,
        best_step=best.step,
        best_point=best.point.as_dict(),
        best_specs=best.specs.as_dict() if best.specs else None,
        transcripts=[t.as_dict() for t in transcripts],
        rounds=list(rounds),
        wall_time=dict(wall or {}),
        **extra,
    )


# --------------------------------------------------------------------------- LEDRO

@dataclass
class _LoopState:
    records: list
    transcripts: list
    messages: list
    history: list  # RoundSummary
    next_prompt: str
    region: dict | None  # last parsed region
    llm_calls: int
    completed: int
    wall: dict

    def to_checkpoint(self, defs) -> dict:
        return {
            "kind": "ledro",
            "n_records": len(self.records),
            "completed_rounds": self.completed,
            "transcripts": [t.as_dict() for t in self.transcripts],
            "messages": self.messages,
            "history": [
                {"round": h.round, "region": [list(iv) for iv in h.region.intervals], "verdict": h.verdict.as_dict()}
                for h in self.history
            ],
            "next_prompt": self.next_prompt,
            "region": self.region,
            "llm_calls": self.llm_calls,
            "wall_time": self.wall,
        }


def _restore(cp: dict, records, names) -> _LoopState:
    from .llm.feedback import FeedbackVerdict

    history = []
    for h in cp["history"]:
        v = h["verdict"]
        verdict = FeedbackVerdict(v["class"] == "positive", v["good_count"], v["best_fom"], v["prior_best"])
        history.append(RoundSummary(h["round"], SearchRegion(names, tuple(map(tuple, h["region"]))), verdict))
    return _LoopState(
        records=records,
        transcripts=[RoundTranscript.from_dict(t) for t in cp["transcripts"]],
        messages=cp["messages"],
        history=history,
        next_prompt=cp["next_prompt"],
        region=cp["region"],
        llm_calls=cp["llm_calls"],
        completed=cp["completed_rounds"],
        wall=cp["wall_time"],
    )


def _add_wall(wall: dict, phase: str, seconds: float) -> None:
    wall[phase] = wall.get(phase, 0.0) + seconds


def run_ledro(
    config: RunConfig,
    run_dir=None,
    client=None,
    evaluator=None,
    resume: bool = False,
    stop_after_round: int | None = None,
) -> RunReport:
    """Calibration, then ``config.iterations`` rounds of model-proposed regions exploited by TuRBO.

    With ``run_dir`` every evaluation, transcript and a checkpoint per round
    are persisted; ``resume=True`` continues from the last checkpoint.
    ``stop_after_round`` ends the run early (status ``interrupted``), which
    is how interruption is exercised in tests.
    """
    bench = config.validate()
    defs, full = bench.defs, bench.full_region
    bounds, weights = config.spec_bounds(), config.fom_weights()
    tcfg = config.turbo_config()
    evaluator = evaluator or make_evaluator(config, bench)
    client = client or make_client(config.llm_config(), defs, full, base_dir=config.base_dir)
    rd = RunDirectory(run_dir) if run_dir is not None else None
    if rd is None:
        if resume:
            raise ConfigError("resume needs a run directory")
        return _ledro_loop(config, bench, bounds, weights, tcfg, evaluator, client, None, None, stop_after_round)
    with rd.locked():
        state = None
        if resume:
            if not rd.exists(CHECKPOINT_FILE):
                raise ConfigError(f"nothing to resume in {rd.path}")
            saved = RunConfig.from_dict(rd.read_json(CONFIG_FILE))
            if saved.to_dict() != config.to_dict():
                raise ConfigError("config differs from the one the run was started with")
            cp = rd.read_json(CHECKPOINT_FILE)
            if cp.get("kind") != "ledro":
                raise ConfigError("checkpoint does not belong to a LEDRO run")
            rd.truncate_log(cp["n_records"])
            records = rd.read_records(defs)
            state = _restore(cp, records, full.names)
            if hasattr(client, "skip"):
                client.skip(state.llm_calls)
        else:
            if rd.exists(CONFIG_FILE):
                raise ConfigError(f"{rd.path} already holds a run; use resume or a fresh directory")
            rd.write_json(CONFIG_FILE, {**config.to_dict(), "base_dir": config.base_dir})
            rd.start_log()
        return _ledro_loop(config, bench, bounds, weights, tcfg, evaluator, client, rd, state, stop_after_round)


def _ledro_loop(config, bench, bounds, weights, tcfg, evaluator, client, rd, state, stop_after_round):
    defs, full = bench.defs, bench.full_region
    threshold = config.gain_threshold
    system_prompt = build_system_prompt(bench.template, bench.topology, bounds, weights)

    def persist(new_records=(), requests_from=0):
        if rd is None:
            return
        if new_records:
            rd.append_records(new_records)
        rd.append_requests(client.requests[requests_from:])
        rd.write_json(CHECKPOINT_FILE, state.to_checkpoint(defs))

    if state is None:
        t0 = time.perf_counter()
        try:
            cal = calibration.synthesize(
                full, defs, evaluator, budget=config.calibration_budget, threshold=threshold,
                k=config.top_k, seed=calibration_seed(config.seed), config=tcfg,
                retries=config.calibration_retries,
            )
        except GoodPointsNotFound as exc:
            if rd is not None:
                rd.append_records(getattr(exc, "records", ()))
                rd.write_json(CHECKPOINT_FILE, {"kind": "ledro", "status": "calibration-failed",
                                                "n_records": len(getattr(exc, "records", ()))})
            raise
        records = list(cal.all)
        state = _LoopState(
            records=records,
            transcripts=[],
            messages=[{"role": "system", "content": system_prompt}],
            history=[],
            next_prompt=build_first_round_prompt(cal.selected, bounds, defs, config.prompt_token_ceiling),
            region=None,
            llm_calls=0,
            completed=0,
            wall={},
        )
        _add_wall(state.wall, CALIBRATION, time.perf_counter() - t0)
        persist(records)

    for r in range(state.completed + 1, config.iterations + 1):
        n_requests = len(client.requests)
        t_llm = time.perf_counter()
        previous = SearchRegion(full.names, tuple(tuple(state.region[n]) for n in full.names)) if state.region else None
        user = state.next_prompt
        convo = state.messages + [{"role": "user", "content": user}]
        response = client.complete(convo)
        state.llm_calls += 1
        convo = convo + [{"role": "assistant", "content": response}]
        reprompt = reprompt_response = ""
        parse_failed = False
        try:
            region = parse_region(response, defs, full, previous=previous)
        except RegionParseFailure:
            reprompt = f"{FORMAT_REMINDER}\n{format_contract(defs)}\n"
            convo = convo + [{"role": "user", "content": reprompt}]
            reprompt_response = client.complete(convo)
            state.llm_calls += 1
            convo = convo + [{"role": "assistant", "content": reprompt_response}]
            try:
                region = parse_region(reprompt_response, defs, full, previous=previous)
            except RegionParseFailure:
                log.warning("round %d: no usable ranges after a reminder; reusing the previous region", r)
                region = previous or full
                parse_failed = True
        state.messages = convo
        _add_wall(state.wall, "llm", time.perf_counter() - t_llm)

        t_opt = time.perf_counter()
        phase = round_phase(r)
        result = turbo.run(region, defs, config.inner_budget, evaluator, seed=round_seed(config.seed, r),
                           config=tcfg, warm_start=state.records)
        start = len(state.records)
        new = [rec.stamped(start + i, phase) for i, rec in enumerate(result.records)]
        prior_best = max(rec.fom for rec in state.records)
        verdict = classify_feedback(new, prior_best, threshold)
        if parse_failed:
            verdict = replace(verdict, positive=False)
        state.records.extend(new)
        _add_wall(state.wall, phase, time.perf_counter() - t_opt)

        feedback_in = state.history[-1].verdict.label if state.history else NONE
        state.history.append(RoundSummary(r, region, verdict))
        reflection = reflection_prompt = ""
        if r < config.iterations:
            t_llm = time.perf_counter()
            if config.reflection:
                reflection_prompt = build_reflection_prompt(state.history, defs)
                reflection = client.complete(state.messages + [{"role": "user", "content": reflection_prompt}])
                state.llm_calls += 1
            state.next_prompt = build_followup_prompt(
                verdict if config.feedback else None,
                good_records(new, threshold) if config.feedback else [],
                defs,
                reflection or None,
                config.prompt_token_ceiling,
            )
            _add_wall(state.wall, "llm", time.perf_counter() - t_llm)
        transcript = RoundTranscript(
            round=r,
            system_prompt=system_prompt,
            user_prompt=user,
            response=response,
            region=region.as_dict(),
            feedback=feedback_in,
            reflection=reflection,
            reflection_prompt=reflection_prompt,
            reprompt=reprompt,
            reprompt_response=reprompt_response,
            parse_failed=parse_failed,
            verdict=verdict.as_dict(),
        )
        state.transcripts.append(transcript)
        state.region = {k: list(v) for k, v in region.as_dict().items()}
        state.completed = r
        if rd is not None:
            rd.write_transcript(r, transcript.render())
        persist(new, n_requests)
        if stop_after_round is not None and r >= stop_after_round and r < config.iterations:
            return _ledro_report(config, state, "interrupted")

    report = _ledro_report(config, state, "complete")
    if rd is not None:
        rd.write_json(REPORT_FILE, report.to_dict())
    return report


def _ledro_report(config, state: _LoopState, status: str) -> RunReport:
    return _report(
        "ledro", config, state.records, status,
        transcripts=state.transcripts,
        rounds=[{"round": h.round, **h.verdict.as_dict()} for h in state.history],
        wall=state.wall,
    )


# --------------------------------------------------------------------------- baseline

def calibration_records(config: RunConfig, bench: Benchmark, evaluator) -> list[EvaluationRecord]:
    """The shared starting points: the same optimizer run LEDRO's calibration starts with."""
    res = turbo.run(bench.full_region, bench.defs, config.calibration_budget, evaluator,
                    seed=calibration_seed(config.seed), config=config.turbo_config())
    return [r.stamped(i, CALIBRATION) for i, r in enumerate(res.records)]


def baseline_phase(i: int) -> str:
    return f"{BASELINE}-{i + 1}"


def run_baseline(
    config: RunConfig,
    steps: int | None = None,
    run_dir=None,
    evaluator=None,
    start: Sequence[EvaluationRecord] | None = None,
) -> RunReport:
    """Continue TuRBO from the calibration observations until ``steps`` total, ``repeats`` times.

    The report's trajectory is that of the best repeat (highest final best
    FoM, earliest repeat on ties); every repeat is listed under ``repeats``.
    """
    bench = config.validate()
    steps = config.baseline_budget(steps)
    if steps < config.calibration_budget:
        raise ConfigError(f"baseline steps {steps} must cover the calibration budget {config.calibration_budget}")
    evaluator = evaluator or make_evaluator(config, bench)
    rd = RunDirectory(run_dir) if run_dir is not None else None
    if rd is None:
        return _baseline(config, bench, steps, evaluator, start, None)
    with rd.locked():
        if rd.exists(CONFIG_FILE):
            raise ConfigError(f"{rd.path} already holds a run; use a fresh directory")
        rd.write_json(CONFIG_FILE, {**config.to_dict(), "baseline_steps": steps, "base_dir": config.base_dir})
        rd.start_log()
        return _baseline(config, bench, steps, evaluator, start, rd)


def _baseline(config, bench, steps, evaluator, start, rd) -> RunReport:
    wall: dict = {}
    t0 = time.perf_counter()
    cal = list(start) if start is not None else calibration_records(config, bench, evaluator)
    cal = cal[: config.calibration_budget]
    _add_wall(wall, CALIBRATION, time.perf_counter() - t0)
    if rd is not None:
        rd.append_records(cal)
    records = list(cal)
    repeats = []
    for i in range(config.repeats):
        t0 = time.perf_counter()
        phase = baseline_phase(i)
        seed = repeat_seed(config.seed, i)
        res = turbo.run(bench.full_region, bench.defs, steps - len(cal), evaluator, seed=seed,
                        config=config.turbo_config(), warm_start=cal)
        new = [r.stamped(len(records) + j, phase) for j, r in enumerate(res.records)]
        records.extend(new)
        if rd is not None:
            rd.append_records(new)
        _add_wall(wall, phase, time.perf_counter() - t0)
        traj = trajectory(cal + new)
        repeats.append({"repeat": i + 1, "seed": seed, "final_best": traj[-1], "trajectory": traj})
    best_i = max(range(len(repeats)), key=lambda i: (repeats[i]["final_best"], -i))
    best_records = cal + [r for r in records if r.phase == baseline_phase(best_i)]
    report = _report("baseline", config, records, "complete", traj_records=best_records, wall=wall,
                     repeats=repeats, best_repeat=best_i + 1, metrics={"steps": steps})
    if rd is not None:
        rd.write_json(REPORT_FILE, report.to_dict())
    return report


# --------------------------------------------------------------------------- metrics

def steps_to_target(values: Sequence[float], target: float) -> int | None:
    """1-based index of the first step whose best-so-far reaches ``target``; None if never."""
    if len(values) == 0:
        raise ValueError("trajectory is empty")
    best = turbo.best_so_far(values)
    hit = np.nonzero(best >= target)[0]
    return int(hit[0]) + 1 if len(hit) else None


def compare_runs(ledro: RunReport, baseline: RunReport) -> dict:
    """FoM delta, signed percent boost and steps-to-target speedup at the baseline's best FoM."""
    for key in ("benchmark", "bounds", "weights"):
        if getattr(ledro, key) != getattr(baseline, key):
            raise ComparisonError(f"reports differ in {key}: {getattr(ledro, key)!r} vs {getattr(baseline, key)!r}")
    base_best = baseline.trajectory[-1]
    ledro_best = ledro.trajectory[-1]
    delta = ledro_best - base_best
    if base_best != 0:
        boost = 100.0 * delta / abs(base_best)
    else:
        boost = 0.0 if delta == 0 else None
    steps_ledro = steps_to_target(ledro.trajectory, base_best)
    steps_base = steps_to_target(baseline.trajectory, base_best)
    speedup = steps_base / steps_ledro if steps_ledro else None
    return {
        "baseline_best": base_best,
        "ledro_best": ledro_best,
        "fom_delta": delta,
        "boost_percent": boost,
        "target": base_best,
        "steps_to_target_ledro": steps_ledro,
        "steps_to_target_baseline": steps_base,
        "speedup": speedup,
        "reached": steps_ledro is not None,
    }


# --------------------------------------------------------------------------- replay

def replay(run_dir) -> RunReport:
    """Rebuild a run's report from its config, evaluation log and checkpoint."""
    rd = RunDirectory(run_dir)
    if not rd.exists(CONFIG_FILE):
        raise ConfigError(f"{rd.path} does not contain a run")
    raw = rd.read_json(CONFIG_FILE)
    config = RunConfig.from_dict(raw)
    bench = config.load_benchmark()
    records = rd.read_records(bench.defs)
    if not records:
        raise ConfigError("evaluation log is empty")
    if rd.exists(CHECKPOINT_FILE):
        cp = rd.read_json(CHECKPOINT_FILE)
        if cp.get("status") == "calibration-failed":
            raise LedroError("calibration found no good points; nothing to report")
        state = _restore(cp, records[: cp["n_records"]], bench.full_region.names)
        status = "complete" if state.completed == config.iterations else "interrupted"
        return _ledro_report(config, state, status)
    steps = raw.get("baseline_steps") or config.baseline_budget()
    cal = [r for r in records if r.phase == CALIBRATION]
    repeats = []
    for i in range(config.repeats):
        mine = [r for r in records if r.phase == baseline_phase(i)]
        if not mine and steps > len(cal):
            break
        traj = trajectory(cal + mine)
        repeats.append({"repeat": i + 1, "seed": repeat_seed(config.seed, i), "final_best": traj[-1],
                        "trajectory": traj})
    best_i = max(range(len(repeats)), key=lambda i: (repeats[i]["final_best"], -i))
    best_records = cal + [r for r in records if r.phase == baseline_phase(best_i)]
    return _report("baseline", config, records, "complete", traj_records=best_records,
                   repeats=repeats, best_repeat=best_i + 1, metrics={"steps": steps})


def fom_is_consistent(records: Sequence[EvaluationRecord], evaluator: CircuitEvaluator) -> bool:
    """Every stored FoM equals a recomputation from its specs (failed records carry the penalty)."""
    for r in records:
        expected = evaluator.penalty if r.failed else evaluator.score(r.specs)
        if not (r.fom == expected or (math.isnan(r.fom) and math.isnan(expected))):
            return False
    return True
