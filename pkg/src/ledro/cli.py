"""Command line: ``ledro run | baseline | compare | replay | validate-config``."""
from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path

from .errors import LedroError
from .orchestrator import (
    ABLATIONS,
    RunConfig,
    RunReport,
    compare_runs,
    replay,
    run_baseline,
    run_ledro,
    with_ablation,
)
from .runlog import REPORT_FILE


def _load_config(args) -> RunConfig:
    cfg = RunConfig.load(args.config) if args.config else RunConfig()
    if getattr(args, "seed", None) is not None:
        cfg = replace(cfg, seed=args.seed)
    if getattr(args, "parallelism", None) is not None:
        cfg = replace(cfg, parallelism=args.parallelism)
    if getattr(args, "backend", None):
        cfg = replace(cfg, evaluator={**cfg.evaluator, "backend": args.backend})
    if getattr(args, "llm_script", None):
        cfg = replace(cfg, llm={**cfg.llm, "backend": "scripted", "script": args.llm_script})
    for name in getattr(args, "ablation", None) or ():
        cfg = with_ablation(cfg, name)
    if getattr(args, "no_reflection", False):
        cfg = with_ablation(cfg, "no-reflection")
    return cfg


def _summary(report: RunReport) -> dict:
    out = {
        "kind": report.kind,
        "status": report.status,
        "evaluations": report.total_evaluations,
        "best_fom": report.best_fom,
        "best_specs": report.best_specs,
    }
    if report.repeats:
        out["best_repeat"] = report.best_repeat
        out["repeat_final_best"] = [r["final_best"] for r in report.repeats]
    if report.rounds:
        out["verdicts"] = [r["class"] for r in report.rounds]
    return out


def _load_report(path) -> RunReport:
    p = Path(path)
    if p.is_dir():
        p = p / REPORT_FILE
    return RunReport.load(p)


def cmd_run(args) -> int:
    cfg = _load_config(args)
    report = run_ledro(cfg, run_dir=args.run_dir, resume=args.resume, stop_after_round=args.stop_after_round)
    print(json.dumps(_summary(report), indent=2))
    return 0


def cmd_baseline(args) -> int:
    cfg = _load_config(args)
    if args.repeats is not None:
        cfg = replace(cfg, repeats=args.repeats)
    report = run_baseline(cfg, steps=args.steps, run_dir=args.run_dir)
    print(json.dumps(_summary(report), indent=2))
    return 0


def cmd_compare(args) -> int:
    metrics = compare_runs(_load_report(args.ledro), _load_report(args.baseline))
    print(json.dumps(metrics, indent=2))
    return 0


def cmd_replay(args) -> int:
    report = replay(args.run_dir)
    if args.write:
        report.save(Path(args.run_dir) / REPORT_FILE)
    print(json.dumps(_summary(report), indent=2))
    return 0


def cmd_validate(args) -> int:
    cfg = RunConfig.load(args.config)
    bench = cfg.validate()
    print(f"ok: {bench.name} ({len(bench.defs)} parameters), {cfg.iterations} rounds")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ledro", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", help="JSON run configuration (defaults apply when omitted)")
        sp.add_argument("--run-dir", help="directory for logs, transcripts and the report")
        sp.add_argument("--seed", type=int, help="override the root seed")
        sp.add_argument("--parallelism", type=int, help="concurrent evaluations per batch")
        sp.add_argument("--backend", choices=("surrogate", "spice"), help="evaluator backend")

    run = sub.add_parser("run", help="run the full LEDRO loop")
    common(run)
    run.add_argument("--llm-script", help="scripted responses file, or oracle:halving")
    run.add_argument("--ablation", action="append", choices=ABLATIONS)
    run.add_argument("--no-reflection", action="store_true", help="same as --ablation no-reflection")
    run.add_argument("--resume", action="store_true", help="continue from the run directory's checkpoint")
    run.add_argument("--stop-after-round", type=int, help="stop (resumably) after this round")
    run.set_defaults(func=cmd_run)

    base = sub.add_parser("baseline", help="run the TuRBO-only baseline")
    common(base)
    base.add_argument("--steps", type=int, help="total evaluations including calibration (e.g. 1200, 2000)")
    base.add_argument("--repeats", type=int)
    base.set_defaults(func=cmd_baseline)

    cmp_ = sub.add_parser("compare", help="compare a LEDRO report with a baseline report")
    cmp_.add_argument("ledro", help="LEDRO run directory or report file")
    cmp_.add_argument("baseline", help="baseline run directory or report file")
    cmp_.set_defaults(func=cmd_compare)

    rep = sub.add_parser("replay", help="rebuild a report from a run directory's logs")
    rep.add_argument("run_dir")
    rep.add_argument("--write", action="store_true", help="overwrite report.json with the rebuilt report")
    rep.set_defaults(func=cmd_replay)

    val = sub.add_parser("validate-config", help="check a configuration file without running")
    val.add_argument("config")
    val.set_defaults(func=cmd_validate)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except LedroError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
