import json
import random
from pathlib import Path

import pytest

from sslesim.crypto.group import TinyGroup
from sslesim.harness.config import parse_config

VECTORS = Path(__file__).parent / "vectors" / "regression.txt"


def load_vectors(kind: str) -> list[list[str]]:
    rows = []
    for line in VECTORS.read_text().splitlines():
        if line and not line.startswith("#"):
            parts = line.split()
            if parts[0] == kind:
                rows.append(parts[1:])
    return rows


def make_config(**fields):
    doc = {"validators": 100, "epochs": 2, "mechanism": "status_quo", "seeds": [1]}
    doc.update(fields)
    return parse_config(json.dumps(doc))


@pytest.fixture
def tiny():
    return TinyGroup()


@pytest.fixture
def rng():
    return random.Random(1234)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
