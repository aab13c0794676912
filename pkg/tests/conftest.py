import numpy as np
import pytest

from measure_calculus import Manifold


@pytest.fixture
def R1():
    return Manifold.euclidean(1)


@pytest.fixture
def R2():
    return Manifold.euclidean(2)


@pytest.fixture
def S2():
    return Manifold.sphere(3)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def acceptance():
    """Record one PASS/FAIL line per acceptance criterion; lines are echoed in the terminal summary."""

    def record(number: int, title: str, ok: bool, detail: str):
        line = f"criterion {number:2d} [{'PASS' if ok else 'FAIL'}] {title}: {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
