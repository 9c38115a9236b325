"""External simulator adapter: deck generation, process invocation, measure parsing.

The adapter writes a deck into a private work directory, runs a configured
command line and reads back a single output file.  The output is a plain
list of named measures the deck asks for::

    gain = 62.1 dB
    ugbw = 1.3e7 Hz
    pm = 71.5
    isupply = 4.2e-6
    device M1 region=saturation vgs=0.41 vds=0.22 gm=3.1e-5 ids=1e-6

Any simulator can be plugged in through a wrapper script that produces this
format; the choice of simulator is configuration.
"""
from __future__ import annotations

import math
import re
import shlex
import shutil
import subprocess
import tempfile
from dataclasses import dataclass, field
from pathlib import Path

from .design_space import Benchmark, DesignPoint, format_value, render_netlist
from .errors import ConfigError, MeasureMissingError, SimulationError, SpiceParseError
from .fom import SpecSet
from .records import REGIONS, TransistorTelemetry

MEASURES = ("gain", "ugbw", "pm", "isupply")

_SCALE = {
    "gain": {"": None, "db": None, "v/v": "linear"},
    "ugbw": {"": 1.0, "hz": 1.0, "khz": 1e3, "mhz": 1e6, "ghz": 1e9},
    "pm": {"": 1.0, "deg": 1.0, "degree": 1.0, "degrees": 1.0},
    "isupply": {"": 1.0, "a": 1.0, "ma": 1e-3, "ua": 1e-6, "na": 1e-9},
}
_MEASURE_LINE = re.compile(r"^\s*([A-Za-z_]+)\s*=\s*(\S+)\s*(\S*)\s*$")
_DEVICE_FIELDS = ("region", "vgs", "vds", "gm", "ids")


@dataclass
class SpiceConfig:
    """``command`` may use ``{deck}``, ``{output}`` and ``{workdir}`` placeholders."""

    command: str
    workdir_root: str | None = None
    timeout: float = 60.0
    keep_workdir: bool = False
    ac_start: float = 1.0
    ac_stop: float = 1e11
    points_per_decade: int = 50
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.command.strip():
            raise ConfigError("simulator command must be non-empty")
        if self.timeout <= 0:
            raise ConfigError("simulator timeout must be positive")

    @classmethod
    def from_dict(cls, d) -> "SpiceConfig":
        known = set(cls.__dataclass_fields__)
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown simulator settings: {sorted(unknown)}")
        return cls(**d)


def build_deck(benchmark: Benchmark, point: DesignPoint, config: SpiceConfig) -> str:
    """Netlist plus parameter echo, AC analysis and the measures we parse back."""
    tb = benchmark.testbench
    out = tb.get("output_node", "out")
    supply = tb.get("supply_source", "VDD")
    lines = [render_netlist(benchmark.template, point).rstrip("\n"), ""]
    for name, value in zip(point.names, point.values):
        lines.append(f"* ledro-param {name} {format_value(value)}")
    lines += [
        f".ac dec {config.points_per_decade} {format_value(config.ac_start)} {format_value(config.ac_stop)}",
        f".measure ac gain max vdb({out})",
        f".measure ac ugbw when vdb({out})=0 fall=1",
        f".measure ac pm find vp({out}) when vdb({out})=0 fall=1",
        f".measure op isupply param='-i({supply})'",
        ".op",
        ".end",
        "",
    ]
    return "\n".join(lines)


def _number(text: str, lineno: int, raw: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise SpiceParseError(f"line {lineno}: non-numeric value {text!r}", raw=raw, line=lineno) from None
    if not math.isfinite(value):
        raise SpiceParseError(f"line {lineno}: non-finite value {text!r}", raw=raw, line=lineno)
    return value


def _parse_device(line: str, lineno: int, raw: str) -> TransistorTelemetry:
    parts = line.split()
    if len(parts) < 2:
        raise SpiceParseError(f"line {lineno}: device line without a name", raw=raw, line=lineno)
    fields = {}
    for tok in parts[2:]:
        if "=" not in tok:
            raise SpiceParseError(f"line {lineno}: malformed field {tok!r}", raw=raw, line=lineno)
        k, v = tok.split("=", 1)
        fields[k.lower()] = v
    missing = [k for k in _DEVICE_FIELDS if k not in fields]
    if missing:
        raise SpiceParseError(f"line {lineno}: device fields missing {missing}", raw=raw, line=lineno)
    region = fields["region"].lower()
    if region not in REGIONS:
        raise SpiceParseError(f"line {lineno}: unknown region {region!r}", raw=raw, line=lineno)
    return TransistorTelemetry(
        device=parts[1],
        region=region,
        v_gs=_number(fields["vgs"], lineno, raw),
        v_ds=_number(fields["vds"], lineno, raw),
        g_m=_number(fields["gm"], lineno, raw),
        i_ds=_number(fields["ids"], lineno, raw),
    )


def parse_spice_measures(raw: str) -> tuple[SpecSet, list[TransistorTelemetry]]:
    """Parse adapter output into specs (dB, Hz, degrees, A) and device telemetry."""
    if not raw.strip():
        raise SpiceParseError("simulator output is empty", raw=raw, line=0)
    values: dict[str, float] = {}
    devices: list[TransistorTelemetry] = []
    for lineno, line in enumerate(raw.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith(("*", "#")):
            continue
        if stripped.lower().startswith("device "):
            devices.append(_parse_device(stripped, lineno, raw))
            continue
        m = _MEASURE_LINE.match(stripped)
        if not m:
            continue
        name, text, unit = m.group(1).lower(), m.group(2), m.group(3).lower()
        if name not in MEASURES:
            continue
        if name in values:
            raise SpiceParseError(f"line {lineno}: measure {name!r} repeated", raw=raw, line=lineno)
        if unit not in _SCALE[name]:
            raise SpiceParseError(f"line {lineno}: unknown unit {unit!r} for {name}", raw=raw, line=lineno)
        value = _number(text, lineno, raw)
        scale = _SCALE[name][unit]
        if name == "gain":
            if scale == "linear":
                if value <= 0:
                    raise SpiceParseError(f"line {lineno}: linear gain must be positive", raw=raw, line=lineno)
                value = 20.0 * math.log10(value)
        else:
            value *= scale
        values[name] = value
    for name in MEASURES:
        if name not in values:
            raise MeasureMissingError(name, raw=raw)
    pm = values["pm"]
    if pm > 360.0 or pm < -180.0:
        pm = (pm + 180.0) % 360.0 - 180.0
    specs = SpecSet(values["gain"], values["ugbw"], pm, values["isupply"])
    return specs, devices


class SpiceBackend:
    """Runs an external simulator once per design point in a private directory."""

    def __init__(self, benchmark: Benchmark, config: SpiceConfig):
        self.benchmark = benchmark
        self.config = config

    def simulate(self, point: DesignPoint):
        cfg = self.config
        workdir = Path(tempfile.mkdtemp(prefix="ledro-", dir=cfg.workdir_root))
        try:
            deck = workdir / "deck.cir"
            output = workdir / "measures.txt"
            deck.write_text(build_deck(self.benchmark, point, cfg))
            cmd = cfg.command.format(
                deck=shlex.quote(str(deck)), output=shlex.quote(str(output)), workdir=shlex.quote(str(workdir))
            )
            try:
                proc = subprocess.run(
                    cmd, shell=True, cwd=workdir, capture_output=True, text=True, timeout=cfg.timeout
                )
            except subprocess.TimeoutExpired as exc:
                raise SimulationError(f"simulator timed out after {cfg.timeout} s") from exc
            if proc.returncode != 0:
                raise SimulationError(
                    f"simulator exited with status {proc.returncode}: {proc.stderr.strip()[-500:]}"
                )
            if not output.exists():
                raise SimulationError("simulator produced no output file")
            return parse_spice_measures(output.read_text())
        finally:
            if not cfg.keep_workdir:
                shutil.rmtree(workdir, ignore_errors=True)


def format_measures(specs: SpecSet, telemetry=()) -> str:
    """Inverse of :func:`parse_spice_measures`, used by wrapper scripts and fixtures."""
    lines = [
        f"gain = {specs.gain!r} dB",
        f"ugbw = {specs.ugbw!r} Hz",
        f"pm = {specs.phase_margin!r}",
        f"isupply = {specs.supply_current!r}",
    ]
    for t in telemetry:
        lines.append(
            f"device {t.device} region={t.region} vgs={t.v_gs!r} vds={t.v_ds!r} gm={t.g_m!r} ids={t.i_ds!r}"
        )
    return "\n".join(lines) + "\n"


def read_deck_params(deck: str) -> dict[str, float]:
    """Recover the ``* ledro-param`` echo lines from a generated deck."""
    params = {}
    for line in deck.splitlines():
        parts = line.split()
        if len(parts) == 4 and parts[:2] == ["*", "ledro-param"]:
            params[parts[2]] = float(parts[3])
    return params
