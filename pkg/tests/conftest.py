import os
from pathlib import Path

import pytest
from hypothesis import settings

from ledro.design_space import load_benchmark
from ledro.evaluator import CircuitEvaluator
from ledro.fom import HIGH_COMPLEXITY_BOUNDS, LOW_COMPLEXITY_BOUNDS

HERE = Path(__file__).parent
GOLDEN = HERE / "golden"
FIXTURES = HERE / "fixtures"

settings.register_profile("default", deadline=None, max_examples=100)
settings.load_profile("default")

# Goldens are frozen files; set LEDRO_UPDATE_GOLDEN=1 to rewrite them after a reviewed change.
UPDATE_GOLDEN = os.environ.get("LEDRO_UPDATE_GOLDEN") == "1"


def check_golden(name: str, text: str) -> None:
    path = GOLDEN / name
    if UPDATE_GOLDEN or not path.exists():
        path.write_text(text)
    assert path.read_text() == text, f"output differs from golden file {name}"


@pytest.fixture(scope="session")
def two_stage():
    return load_benchmark("two_stage")


@pytest.fixture(scope="session")
def five_t():
    return load_benchmark("five_t")


@pytest.fixture(scope="session")
def evaluator(two_stage):
    return CircuitEvaluator(two_stage, LOW_COMPLEXITY_BOUNDS)


@pytest.fixture(scope="session")
def hard_evaluator(two_stage):
    return CircuitEvaluator(two_stage, HIGH_COMPLEXITY_BOUNDS)
