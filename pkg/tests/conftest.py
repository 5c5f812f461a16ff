import numpy as np
import pytest

from rope_algebra.linalg import skew_from_upper

_ACCEPTANCE_LINES = []


def random_skew(rng, d, scale=1.0):
    return skew_from_upper(rng.uniform(-scale, scale, size=d * (d - 1) // 2), d)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def record_criterion():
    def record(number, title, passed, detail):
        _ACCEPTANCE_LINES.append(f"[{'PASS' if passed else 'FAIL'}] criterion {number}: {title} -- {detail}")

    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
