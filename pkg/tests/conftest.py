from __future__ import annotations

import random
from importlib import resources
from pathlib import Path

import pytest

from provdelta.sim import ExecutionContext, random_workflow
from provdelta.traceio import read_trace

CRITERIA_LINES: list[str] = []


def data_path(name: str) -> Path:
    return Path(str(resources.files("provdelta") / "data" / name))


def load_fixture(name: str):
    return read_trace(data_path(name))


def simulated_context(seed: int, max_tasks: int = 11, **kwargs) -> tuple[random.Random, ExecutionContext]:
    rng = random.Random(seed)
    workflow, state = random_workflow(rng, rng.randint(1, max_tasks), **kwargs)
    return rng, ExecutionContext.initial(workflow, external_state=state, seed=seed)


@pytest.fixture
def input_change():
    return load_fixture("input_change_a.json"), load_fixture("input_change_b.json")


@pytest.fixture
def evolved():
    return load_fixture("evolved_a.json"), load_fixture("evolved_b.json")


@pytest.fixture
def unrelated():
    return load_fixture("unrelated_a.json"), load_fixture("unrelated_b.json")


def pytest_terminal_summary(terminalreporter):
    if CRITERIA_LINES:
        terminalreporter.section("acceptance criteria")
        for line in CRITERIA_LINES:
            terminalreporter.write_line(line)
