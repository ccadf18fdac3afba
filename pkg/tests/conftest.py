import numpy as np
import pytest

from homophily.io import bundled_counts, bundled_table
from homophily.survey import index_counts

ACCEPTANCE_RESULTS: dict[int, tuple[bool, str]] = {}


@pytest.fixture(scope="session")
def tables():
    return {k: bundled_table(k) for k in ("P_num1", "Q_num1", "P_num2", "Q_num2")}


@pytest.fixture(scope="session")
def counts():
    return bundled_counts()


@pytest.fixture(scope="session")
def counts_index(counts):
    return index_counts(counts)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for crit in sorted(ACCEPTANCE_RESULTS):
        ok, title = ACCEPTANCE_RESULTS[crit]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  criterion {crit}: {title}")
