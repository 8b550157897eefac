import pytest

from prosumer_sim import presets, sample_cost_population, solve_full
from prosumer_sim.engine import run

ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def paper_cfg():
    return presets.paper()


@pytest.fixture(scope="session")
def paper_costs(paper_cfg):
    return sample_cost_population(paper_cfg)


@pytest.fixture(scope="session")
def paper_solution(paper_cfg, paper_costs):
    return solve_full(paper_costs, paper_cfg)


@pytest.fixture(scope="session")
def paper_run(paper_cfg, paper_costs):
    return run(paper_cfg, paper_costs)


@pytest.fixture(scope="session")
def acceptance_report():
    def record(number, name, passed, detail=""):
        ACCEPTANCE_LINES.append(f"[{'PASS' if passed else 'FAIL'}] criterion {number}: {name} {detail}".rstrip())
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
