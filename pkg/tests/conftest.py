import numpy as np
import pytest

from nudec import prob
from nudec.region import RateTuple


def toy_source() -> prob.JointPmf:
    """U constant, V2 = A, V3 = B, X = (A, B) with index 2A + B, uniform."""
    p = np.zeros((1, 2, 2, 4))
    for a in range(2):
        for b in range(2):
            p[0, a, b, 2 * a + b] = 0.25
    return prob.JointPmf((1, 2, 2, 4), p)


def toy_channel() -> prob.CondPmf:
    """Y1 = X, Y2 = A, Y3 = B."""
    return prob.CondPmf.deterministic((4,), (4, 2, 2), lambda x: (x, x // 2, x % 2))


def bsc(p: float) -> np.ndarray:
    return np.array([[1 - p, p], [p, 1 - p]])


@pytest.fixture
def toy_joint():
    return prob.chain_compose(toy_source(), toy_channel())


@pytest.fixture
def toy_rates():
    return RateTuple(R0=0.75, T2=0.1875, T3=0.1875)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
