import random

import pytest

from scn.model import build_network

ACCEPTANCE_LINES: list[str] = []


def random_network(rng: random.Random, n: int, m: int, p: float = 0.5):
    return build_network(n, m, [[j for j in range(m) if rng.random() < p] for _ in range(n)])


@pytest.fixture
def rng():
    return random.Random(20240611)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
