from pathlib import Path

import pytest

from andna.netsim import SimConfig, Simulation

ROOT = Path(__file__).resolve().parent.parent
SCENARIOS = ROOT / "scenarios"
GOLDEN = Path(__file__).resolve().parent / "golden"
DATA = Path(__file__).resolve().parent / "data"


@pytest.fixture
def sim():
    return Simulation(SimConfig(seed=7))


@pytest.fixture
def fast_sim():
    """MAC-keyed simulation for tests that sign a lot."""
    return Simulation(SimConfig(seed=7, key_scheme="mac"))


def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[n])
