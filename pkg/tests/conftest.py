import numpy as np
import pytest
from hypothesis import strategies as st

from zbconc.permstat import SquareMatrix
from zbconc.zerobias import DiscreteDist

ACCEPTANCE_RESULTS: list[tuple[str, bool, str]] = []


def record_acceptance(criterion: str, passed: bool, detail: str = "") -> None:
    ACCEPTANCE_RESULTS.append((criterion, passed, detail))


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for criterion, passed, detail in ACCEPTANCE_RESULTS:
        status = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"[{status}] {criterion}: {detail}")


@pytest.fixture
def acceptance():
    return record_acceptance


@pytest.fixture
def A3():
    return SquareMatrix([[0, 1, 2], [1, 2, 0], [2, 0, 1]])


def random_mean_zero(rng: np.random.Generator, k: int, spread: float = 3.0) -> DiscreteDist:
    values = np.sort(rng.uniform(-spread, spread, k))
    while np.any(np.diff(values) < 1e-3):
        values = np.sort(rng.uniform(-spread, spread, k))
    probs = rng.uniform(0.05, 1.0, k)
    probs /= probs.sum()
    values = values - np.dot(probs, values)
    return DiscreteDist(values, probs)


def random_symmetric(rng: np.random.Generator, n: int, integer: bool = False) -> SquareMatrix:
    a = rng.integers(-5, 6, (n, n)).astype(float) if integer else rng.random((n, n))
    a = np.triu(a) + np.triu(a, 1).T
    return SquareMatrix(a)


@st.composite
def mean_zero_dists(draw, min_atoms=2, max_atoms=6):
    k = draw(st.integers(min_atoms, max_atoms))
    values = draw(st.lists(st.floats(-10, 10, allow_nan=False), min_size=k, max_size=k,
                           unique=True))
    weights = draw(st.lists(st.floats(0.05, 1.0), min_size=k, max_size=k))
    # sorted plus a ramp keeps atoms at least 1e-2 apart
    values = np.sort(np.array(values)) + 1e-2 * np.arange(k)
    probs = np.array(weights) / np.sum(weights)
    values = values - np.dot(probs, values)
    return DiscreteDist(values, probs)
