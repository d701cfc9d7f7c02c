import os

import hypothesis
import pytest

from attackrules.plantsim import AttackScenario, write_traces

hypothesis.settings.register_profile("ci", max_examples=200, deadline=None)
hypothesis.settings.register_profile("fast", max_examples=20, deadline=None)
hypothesis.settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "ci"))

FORCE_OPEN = AttackScenario("force_valve_open", 2000, 2500)


@pytest.fixture(scope="session")
def sim_csvs(tmp_path_factory):
    """Normal and forced-open-valve traces, 5000 ticks each."""
    d = tmp_path_factory.mktemp("sim")
    normal, attack = d / "normal.csv", d / "attack.csv"
    write_traces(normal, 5000, seed=1)
    write_traces(attack, 5000, FORCE_OPEN, seed=2)
    return normal, attack


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
