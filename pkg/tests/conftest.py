import numpy as np
import pytest

from lolrec.market_data import MarketMatrix


def random_market(rng, n, d, scale=0.02):
    """Log-normal price relatives with occasional regime-like drifts."""
    drift = rng.normal(0, 0.002, d)
    return MarketMatrix.from_array(np.exp(rng.normal(drift, scale, (n, d))))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# acceptance criteria record (number, passed, detail) here; summary printed at the end
ACCEPTANCE_RESULTS: list[tuple[int, str, bool, str]] = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for num, name, ok, detail in sorted(ACCEPTANCE_RESULTS):
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] {num}. {name}: {detail}")
