"""Language-model side of the loop: prompts, response parsing, feedback and backends."""
from .client import HalvingOracle, LiveClient, LlmClientConfig, ScriptedClient, make_client
from .feedback import FeedbackVerdict, classify_feedback, good_records
from .parse import extract_ranges, parse_region
from .prompts import (
    RoundSummary,
    build_first_round_prompt,
    build_followup_prompt,
    build_reflection_prompt,
    build_system_prompt,
    render_region,
)

__all__ = [
    "FeedbackVerdict",
    "HalvingOracle",
    "LiveClient",
    "LlmClientConfig",
    "RoundSummary",
    "ScriptedClient",
    "build_first_round_prompt",
    "build_followup_prompt",
    "build_reflection_prompt",
    "build_system_prompt",
    "classify_feedback",
    "extract_ranges",
    "good_records",
    "make_client",
    "parse_region",
    "render_region",
]
