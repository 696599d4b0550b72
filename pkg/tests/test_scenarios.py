import pytest

from andna.netsim import SimConfig
from andna.scenario import parse_scenario, run_commands, run_scenario

from conftest import GOLDEN, SCENARIOS

NAMES = ["basic", "queue", "expiry", "mutation", "angelica", "challenge", "churn"]


@pytest.mark.parametrize("name", NAMES)
def test_golden_log(name):
    result = run_scenario(SCENARIOS / f"{name}.scn")
    assert result.errors == 0
    assert result.text == (GOLDEN / f"{name}.log").read_text()


@pytest.mark.parametrize("name", NAMES)
def test_replicas_agree(name):
    """Every command boundary: members of a gnode hold identical databases."""
    path = SCENARIOS / f"{name}.scn"
    cmds = parse_scenario(path.read_text())
    for cut in range(1, len(cmds) + 1):
        sim = run_commands(cmds[:cut], SimConfig(), path.parent).sim
        for g, dumps in sim.gnode_dumps().items():
            assert len(set(dumps.values())) == 1, (name, cut, g)


def test_mutation_verdicts():
    log = (GOLDEN / "mutation.log").read_text().splitlines()
    assert "203\ttransfer\t119.0.0.1\t74ae323f\ttransferred" in log
    assert '304\tregister\t10.0.0.2\t"netsukuka"\tStolenNameBlocked' in log
    assert log[-1].endswith("-> 10.0.0.1/16/1\tok")


def test_queue_promotion():
    log = (GOLDEN / "queue.log").read_text()
    assert '62\tregister\t10.0.0.6\t"popular"\tQueueFull' in log
    assert '"popular" svc=0 -> 10.0.0.2/16/1\tok' in log
