"""Per-round record of the conversation with the model."""
from __future__ import annotations

from dataclasses import asdict, dataclass, field

NONE = "none"


@dataclass(frozen=True)
class RoundTranscript:
    round: int
    system_prompt: str
    user_prompt: str
    response: str
    region: dict  # name -> [lo, hi] after clamping
    feedback: str = NONE  # verdict of the previous round
    reflection: str = ""  # reflection written after this round
    reflection_prompt: str = ""
    reprompt: str = ""
    reprompt_response: str = ""
    parse_failed: bool = False
    verdict: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        d = asdict(self)
        d["region"] = {k: list(v) for k, v in self.region.items()}
        return d

    @classmethod
    def from_dict(cls, d) -> "RoundTranscript":
        d = dict(d)
        d["region"] = {k: tuple(v) for k, v in d["region"].items()}
        return cls(**d)

    def render(self) -> str:
        parts = [
            f"round {self.round}",
            f"previous feedback: {self.feedback}",
            "=== system ===",
            self.system_prompt.rstrip(),
            "=== user ===",
            self.user_prompt.rstrip(),
            "=== assistant ===",
            self.response.rstrip(),
        ]
        if self.reprompt:
            parts += ["=== user (format reminder) ===", self.reprompt.rstrip(),
                      "=== assistant ===", self.reprompt_response.rstrip()]
        parts += ["=== parsed region ==="]
        parts += [f"{k}: {v[0]!r} to {v[1]!r}" for k, v in self.region.items()]
        if self.parse_failed:
            parts.append("(unparseable; previous region reused)")
        if self.verdict:
            parts += ["=== optimizer outcome ===",
                      f"{self.verdict['class']}: {self.verdict['good_count']} good, best FoM {self.verdict['best_fom']!r}"]
        if self.reflection_prompt:
            parts += ["=== reflection request ===", self.reflection_prompt.rstrip(),
                      "=== reflection ===", self.reflection.rstrip()]
        return "\n".join(parts) + "\n"
