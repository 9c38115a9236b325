"""Language-model backends: a live chat-completion client and offline scripted stand-ins."""
from __future__ import annotations

import json
import logging
import math
import os
import re
import time
import urllib.error
import urllib.request
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Callable, Sequence

from ..design_space import FIN, ParameterDef, SearchRegion, clamp_region
from ..errors import ConfigError, LlmTransportError
from .prompts import FORMAT_REMINDER, REFLECTION_MARKER, render_region

log = logging.getLogger(__name__)

LIVE = "live-http"
SCRIPTED = "scripted"
DEFAULT_DELIMITER = "\n===\n"


@dataclass
class LlmClientConfig:
    backend: str = SCRIPTED
    endpoint: str = ""
    model: str = ""
    temperature: float = 0.8
    max_tokens: int = 1000
    decoding: str = "sampled"  # or "greedy" (sends temperature 0)
    timeout: float = 120.0
    attempts: int = 3
    backoff: float = 1.0
    api_key_env: str = "LEDRO_LLM_API_KEY"
    script: str | None = None  # scripted: fixture file, or "oracle:halving"
    delimiter: str = DEFAULT_DELIMITER

    def __post_init__(self):
        if self.backend not in (LIVE, SCRIPTED):
            raise ConfigError(f"unknown llm backend {self.backend!r}")
        if not self.temperature >= 0:
            raise ConfigError("temperature must be >= 0")
        if self.max_tokens <= 0:
            raise ConfigError("max_tokens must be positive")
        if self.decoding not in ("sampled", "greedy"):
            raise ConfigError(f"unknown decoding mode {self.decoding!r}")
        if self.attempts < 1:
            raise ConfigError("attempts must be >= 1")
        if self.backend == LIVE and not (self.endpoint and self.model):
            raise ConfigError("live backend needs endpoint and model")

    @classmethod
    def from_dict(cls, d) -> "LlmClientConfig":
        unknown = set(d) - set(cls.__dataclass_fields__)
        if unknown:
            raise ConfigError(f"unknown llm settings: {sorted(unknown)}")
        return cls(**d)

    def to_dict(self) -> dict:
        return asdict(self)


Messages = Sequence[dict]


class LiveClient:
    """OpenAI-style chat completion over HTTP with retry on transport errors.

    ``transport(url, body, headers, timeout) -> bytes`` can be injected for
    testing; ``sleep`` likewise.
    """

    def __init__(self, config: LlmClientConfig, transport=None, sleep=time.sleep):
        self.config = config
        self.transport = transport or _urllib_transport
        self.sleep = sleep
        self.requests: list[dict] = []
        self.calls = 0

    def request_body(self, messages: Messages) -> dict:
        cfg = self.config
        return {
            "model": cfg.model,
            "messages": [dict(m) for m in messages],
            "temperature": 0.0 if cfg.decoding == "greedy" else cfg.temperature,
            "max_tokens": cfg.max_tokens,
        }

    def complete(self, messages: Messages) -> str:
        cfg = self.config
        body = self.request_body(messages)
        headers = {"Content-Type": "application/json"}
        key = os.environ.get(cfg.api_key_env)
        if key:
            headers["Authorization"] = f"Bearer {key}"
        record = {"endpoint": cfg.endpoint, **{k: v for k, v in body.items() if k != "messages"},
                  "n_messages": len(body["messages"]), "attempts": 0, "status": "pending"}
        self.requests.append(record)
        last = None
        for attempt in range(cfg.attempts):
            record["attempts"] = attempt + 1
            try:
                raw = self.transport(cfg.endpoint, json.dumps(body).encode(), headers, cfg.timeout)
                text = _completion_text(raw)
                record["status"] = "ok"
                self.calls += 1
                return text
            except (urllib.error.URLError, TimeoutError, OSError, LlmTransportError) as exc:
                last = exc
                log.warning("llm request failed (attempt %d/%d): %s", attempt + 1, cfg.attempts, exc)
                if attempt + 1 < cfg.attempts:
                    self.sleep(cfg.backoff * 2**attempt)
        record["status"] = "failed"
        raise LlmTransportError(f"llm request failed after {cfg.attempts} attempts: {last}")


def _urllib_transport(url, body, headers, timeout):
    req = urllib.request.Request(url, data=body, headers=headers, method="POST")
    with urllib.request.urlopen(req, timeout=timeout) as resp:
        return resp.read()


def _completion_text(raw: bytes) -> str:
    try:
        data = json.loads(raw)
        return data["choices"][0]["message"]["content"]
    except (ValueError, KeyError, IndexError, TypeError) as exc:
        raise LlmTransportError(f"malformed completion payload: {exc}") from exc


class ScriptedClient:
    """Replays canned responses in order, or delegates to a responder callable."""

    def __init__(self, responses: Sequence[str] | None = None, responder: Callable[[Messages], str] | None = None,
                 config: LlmClientConfig | None = None):
        if (responses is None) == (responder is None):
            raise ConfigError("give exactly one of responses or responder")
        self.responses = list(responses) if responses is not None else None
        self.responder = responder
        self.config = config or LlmClientConfig()
        self.requests: list[dict] = []
        self.calls = 0

    @classmethod
    def from_file(cls, path, delimiter: str = DEFAULT_DELIMITER, config=None) -> "ScriptedClient":
        text = Path(path).read_text()
        parts = [p.strip("\n") for p in text.split(delimiter)]
        return cls(responses=[p for p in parts if p.strip()], config=config)

    def skip(self, n: int) -> None:
        """Advance past ``n`` responses (used when resuming a run)."""
        if self.responses is not None and n > len(self.responses):
            raise ConfigError("scripted responses exhausted")
        self.calls += n

    def complete(self, messages: Messages) -> str:
        cfg = self.config
        self.requests.append({
            "endpoint": SCRIPTED, "model": cfg.model,
            "temperature": 0.0 if cfg.decoding == "greedy" else cfg.temperature,
            "max_tokens": cfg.max_tokens, "n_messages": len(messages), "attempts": 1, "status": "ok",
        })
        if self.responder is not None:
            out = self.responder(messages)
        else:
            if self.calls >= len(self.responses):
                raise ConfigError(f"scripted responses exhausted after {self.calls} calls")
            out = self.responses[self.calls]
        self.calls += 1
        return out


_DESIGN = re.compile(r"^Design \d+ \(FoM (?P<fom>\S+)\)\s*$")
_ASSIGN = re.compile(r"([A-Za-z_][A-Za-z0-9_]*)=([-+0-9.eE]+)")


class HalvingOracle:
    """Scripted responder that narrows the region around the best design it has seen.

    Answer ``k`` is a box centred on the best design found in any prompt of
    the conversation, with every axis ``ratio**k`` of the full width (shifted
    to stay inside the full range).  The oracle is a pure function of the
    messages it is shown, so resumed runs need no replay.  Reflection
    requests get a fixed note.
    """

    def __init__(self, defs: Sequence[ParameterDef], full: SearchRegion, ratio: float = 0.5,
                 min_fraction: float = 0.0):
        self.defs = tuple(defs)
        self.full = full
        self.ratio = ratio
        self.min_fraction = min_fraction

    @staticmethod
    def best_design(texts: Sequence[str]) -> dict | None:
        best = None
        for text in texts:
            fom = None
            for line in text.splitlines():
                s = line.strip()
                m = _DESIGN.match(s)
                if m:
                    fom = float(m.group("fom"))
                elif fom is not None and s.startswith("parameters:"):
                    if best is None or fom > best[0]:
                        best = (fom, {k: float(v) for k, v in _ASSIGN.findall(s)})
                    fom = None
        return best[1] if best else None

    def region(self, k: int, center: dict | None) -> SearchRegion:
        frac = max(self.ratio**k, self.min_fraction)
        center = center or {}
        out = {}
        for d, (lo, hi) in zip(self.defs, self.full.intervals):
            c = center.get(d.name, 0.5 * (lo + hi))
            half = 0.5 * frac * (hi - lo)
            a, b = c - half, c + half
            if a < lo:
                a, b = lo, lo + 2 * half
            if b > hi:
                a, b = hi - 2 * half, hi
            if d.kind == FIN:
                a, b = math.floor(a), math.ceil(b)
            out[d.name] = (a, b)
        return clamp_region(out, self.full, self.defs)

    def __call__(self, messages: Messages) -> str:
        if REFLECTION_MARKER in messages[-1]["content"]:
            return "Narrowing around the best design has worked; keep shrinking the box around it."
        prompts = [m["content"] for m in messages if m["role"] == "user"]
        k = sum(1 for p in prompts if FORMAT_REMINDER not in p)
        region = self.region(k, self.best_design(prompts))
        return "Proposed ranges:\n" + render_region(region, self.defs) + "\n"


def make_client(config: LlmClientConfig, defs=None, full=None, base_dir=None):
    """Client for ``config``.  ``script="oracle:halving"`` builds a :class:`HalvingOracle`."""
    if config.backend == LIVE:
        return LiveClient(config)
    if not config.script:
        raise ConfigError("scripted backend needs a script file or oracle name")
    if config.script.startswith("oracle:"):
        name = config.script.split(":", 1)[1]
        if name != "halving":
            raise ConfigError(f"unknown oracle {name!r}")
        if defs is None or full is None:
            raise ConfigError("oracle backends need the parameter definitions")
        return ScriptedClient(responder=HalvingOracle(defs, full), config=config)
    path = Path(config.script)
    if not path.is_absolute() and base_dir is not None:
        path = Path(base_dir) / path
    if not path.exists():
        raise ConfigError(f"scripted response file not found: {path}")
    return ScriptedClient.from_file(path, config.delimiter, config=config)
