import random
import sys
from pathlib import Path

import pytest
from hypothesis import settings

sys.path.insert(0, str(Path(__file__).parent))

from zcancel.diagrams import parse_chain  # noqa: E402
from zcancel.cli import FIXTURE_DIR  # noqa: E402

settings.register_profile("repo", derandomize=True)
settings.load_profile("repo")

ACCEPTANCE_LOG: list = []


def load(name):
    return parse_chain((FIXTURE_DIR / f"{name}.txt").read_text())


@pytest.fixture(scope="session")
def diagrams():
    return {n: load(n) for n in ("a_chain", "b_chain", "c_chain", "b_plus_z", "c_plus_z")}


@pytest.fixture
def rng():
    return random.Random(424242)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LOG:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(ACCEPTANCE_LOG):
        terminalreporter.write_line(line[1])
