"""Run directory: config snapshot, append-only evaluation log, transcripts, checkpoint, report.

The evaluation log is tab-separated, one record per line.  Floats are
written with ``repr`` so a record read back is bit-identical to the one
written, which is what makes resumed runs reproduce uninterrupted ones.
"""
from __future__ import annotations

import contextlib
import json
import math
import os
from pathlib import Path
from typing import Iterable, Sequence

from filelock import FileLock, Timeout

from .design_space import DesignPoint, ParameterDef
from .errors import ConfigError, RunLockedError
from .fom import SpecSet
from .records import EvaluationRecord, TransistorTelemetry

LOG_COLUMNS = (
    "step", "phase", "fom", "failed", "gain", "ugbw", "phase_margin", "supply_current",
    "point", "regions", "telemetry", "error",
)
CONFIG_FILE = "config.json"
LOG_FILE = "evaluations.tsv"
CHECKPOINT_FILE = "checkpoint.json"
REPORT_FILE = "report.json"
REQUESTS_FILE = "llm_requests.jsonl"
TRANSCRIPT_DIR = "transcripts"
LOCK_FILE = ".lock"


def _f(x: float) -> str:
    return repr(float(x))


def _clean(text: str) -> str:
    return text.replace("\t", " ").replace("\r", " ").replace("\n", " ")


def record_to_row(r: EvaluationRecord) -> str:
    s = r.specs
    spec_cols = [_f(s.gain), _f(s.ugbw), _f(s.phase_margin), _f(s.supply_current)] if s else ["", "", "", ""]
    point = json.dumps(dict(zip(r.point.names, r.point.values)), separators=(",", ":"))
    regions = ",".join(f"{t.device}:{t.region}" for t in r.telemetry)
    telemetry = json.dumps([[t.device, t.region, t.v_gs, t.v_ds, t.g_m, t.i_ds] for t in r.telemetry],
                           separators=(",", ":"))
    cols = [str(r.step), r.phase, _f(r.fom), "1" if r.failed else "0", *spec_cols, point, regions, telemetry,
            _clean(r.error)]
    return "\t".join(cols)


def row_to_record(row: str, defs: Sequence[ParameterDef]) -> EvaluationRecord:
    cols = row.rstrip("\n").split("\t")
    if len(cols) != len(LOG_COLUMNS):
        raise ConfigError(f"malformed log row with {len(cols)} fields")
    c = dict(zip(LOG_COLUMNS, cols))
    values = json.loads(c["point"])
    point = DesignPoint.from_mapping(defs, values)
    specs = None
    if c["gain"]:
        specs = SpecSet(float(c["gain"]), float(c["ugbw"]), float(c["phase_margin"]), float(c["supply_current"]))
    telemetry = tuple(TransistorTelemetry(*t) for t in json.loads(c["telemetry"]))
    return EvaluationRecord(
        point=point,
        specs=specs,
        fom=float(c["fom"]),
        telemetry=telemetry,
        phase=c["phase"],
        step=int(c["step"]),
        failed=c["failed"] == "1",
        error=c["error"],
    )


class RunDirectory:
    """One directory per run; a lockfile keeps out a second orchestrator."""

    def __init__(self, path):
        self.path = Path(path)

    @contextlib.contextmanager
    def locked(self):
        self.path.mkdir(parents=True, exist_ok=True)
        lock = FileLock(str(self.path / LOCK_FILE), timeout=0)
        try:
            lock.acquire()
        except Timeout:
            raise RunLockedError(f"run directory {self.path} is in use by another process") from None
        try:
            yield self
        finally:
            lock.release()

    def file(self, name: str) -> Path:
        return self.path / name

    def exists(self, name: str) -> bool:
        return (self.path / name).exists()

    # config / checkpoint / report
    def write_json(self, name: str, data) -> None:
        tmp = self.path / (name + ".tmp")
        tmp.write_text(json.dumps(data, indent=2, sort_keys=True) + "\n")
        os.replace(tmp, self.path / name)

    def read_json(self, name: str):
        return json.loads((self.path / name).read_text())

    # evaluation log
    def start_log(self) -> None:
        (self.path / LOG_FILE).write_text("\t".join(LOG_COLUMNS) + "\n")

    def append_records(self, records: Iterable[EvaluationRecord]) -> None:
        with open(self.path / LOG_FILE, "a") as fh:
            for r in records:
                fh.write(record_to_row(r) + "\n")
            fh.flush()
            os.fsync(fh.fileno())

    def read_records(self, defs: Sequence[ParameterDef], limit: int | None = None) -> list[EvaluationRecord]:
        lines = (self.path / LOG_FILE).read_text().splitlines()
        if not lines or lines[0].split("\t") != list(LOG_COLUMNS):
            raise ConfigError("evaluation log header is missing or unexpected")
        rows = lines[1:] if limit is None else lines[1:1 + limit]
        return [row_to_record(row, defs) for row in rows]

    def truncate_log(self, n_records: int) -> None:
        """Drop rows past ``n_records`` (a partially logged round after a crash)."""
        lines = (self.path / LOG_FILE).read_text().splitlines(keepends=True)
        (self.path / LOG_FILE).write_text("".join(lines[: 1 + n_records]))

    # llm audit and transcripts
    def append_requests(self, requests: Iterable[dict]) -> None:
        with open(self.path / REQUESTS_FILE, "a") as fh:
            for req in requests:
                fh.write(json.dumps(req, sort_keys=True) + "\n")

    def write_transcript(self, round_index: int, text: str) -> None:
        d = self.path / TRANSCRIPT_DIR
        d.mkdir(exist_ok=True)
        (d / f"round-{round_index:02d}.txt").write_text(text)


def finite_or_none(x):
    return x if x is not None and math.isfinite(x) else None
