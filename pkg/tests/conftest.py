import sys
import datetime as dt

import pytest

from vecon.model import AnalysisWindow, BondQuote, PriceSeries, Snapshot, VolumeRecord
from vecon.synth import make_economy

START = dt.date(2018, 6, 13)


@pytest.fixture
def window5():
    return AnalysisWindow(START, 5)


@pytest.fixture
def tiny_snapshot(window5):
    series = [
        PriceSeries.contiguous(1, [10, 11, 12, 11, 10]),
        PriceSeries.contiguous(2, [100, 100, 100, 100, 100]),
        PriceSeries.contiguous(3, [5, 6, 7, 8, 9]),
        PriceSeries.contiguous(4, [1000, 990, 1010, 1020, 1030]),
        PriceSeries.contiguous(5, [50, 55, 45, 50, 60]),
    ]
    volumes = [VolumeRecord(1, 300), VolumeRecord(4, 20), VolumeRecord(5, 7)]
    return Snapshot(window5, tuple(series), tuple(volumes), BondQuote("5.0000", 4_000_000))


@pytest.fixture(scope="session")
def economy400():
    return make_economy(400, 180, seed=2024, n_static=12, bond=BondQuote("5.4900", 4_500_000))


def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("tests.test_acceptance")
    if module is None or not module.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in module.format_results():
        terminalreporter.write_line(line)
