"""Interrupt a run after two rounds, resume it, and check nothing changed.

Run with ``python demos/resume_a_run.py``.
"""
import filecmp
import tempfile
from pathlib import Path

from ledro.orchestrator import RunConfig, run_ledro

config = RunConfig(iterations=4)
with tempfile.TemporaryDirectory() as tmp:
    tmp = Path(tmp)
    straight = run_ledro(config, run_dir=tmp / "straight")
    first = run_ledro(config, run_dir=tmp / "resumed", stop_after_round=2)
    print(f"stopped after round 2 with {first.total_evaluations} evaluations ({first.status})")
    resumed = run_ledro(config, run_dir=tmp / "resumed", resume=True)
    same_log = filecmp.cmp(tmp / "straight" / "evaluations.tsv", tmp / "resumed" / "evaluations.tsv", shallow=False)
    print(f"resumed to {resumed.total_evaluations} evaluations; identical log: {same_log}; "
          f"identical report: {resumed == straight}")
