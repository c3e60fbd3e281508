import numpy as np
import pytest

ACCEPTANCE_LINES = []


def random_orthogonal(rng):
    """Uniform draw from O(2): random angle, random reflection flag."""
    t = rng.uniform(0, 2 * np.pi)
    c, s = np.cos(t), np.sin(t)
    if rng.random() < 0.5:
        return np.array([[c, -s], [s, c]])
    return np.array([[c, s], [s, -c]])


def random_stack(rng, levels):
    return np.stack([random_orthogonal(rng) for _ in range(levels)])


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
