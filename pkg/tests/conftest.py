import pytest

from stranded_grid import lp
from stranded_grid.dispatch import dispatch_checks
from stranded_grid.fixtures import data_path
from stranded_grid.network import load_network
from stranded_grid.scenario import load_scenarios

ACCEPTANCE: dict[int, str] = {}


def pytest_configure(config):
    # every Optimal LP solve in the run is certified; a failure raises
    lp.verification.enabled = True


def pytest_collection_modifyitems(items):
    # acceptance runs last so the run-wide solver tallies cover every other test
    items.sort(key=lambda item: item.module.__name__.endswith("test_acceptance"))


def record_acceptance(number: int, passed: bool, detail: str):
    line = f"criterion {number}: {'PASS' if passed else 'FAIL'} {detail}"
    ACCEPTANCE[number] = line
    print(line)


def pytest_terminal_summary(terminalreporter):
    v = lp.verification
    tr = terminalreporter
    if ACCEPTANCE:
        tr.section("acceptance criteria")
        for k in sorted(ACCEPTANCE):
            tr.write_line(ACCEPTANCE[k])
    tr.section("solver verification")
    tr.write_line(f"LP certificates checked: {v.checked}; worst residual {v.worst_residual:.2e}, "
                  f"worst relative duality gap {v.worst_gap:.2e}, "
                  f"worst complementarity {v.worst_complementarity:.2e}")
    tr.write_line(f"dispatch identity checks: {dispatch_checks.checked}; worst {dispatch_checks.worst:.2e}")


@pytest.fixture(scope="session")
def demo5():
    return load_network(data_path("demo5.json"))


@pytest.fixture(scope="session")
def spring(demo5):
    return load_scenarios(data_path("demo5_Spring.csv"), demo5)


@pytest.fixture(scope="session")
def tiny3():
    net = load_network(data_path("tiny3.json"))
    return net, load_scenarios(data_path("tiny3.csv"), net)


@pytest.fixture(scope="session")
def tiny4():
    net = load_network(data_path("tiny4.json"))
    return net, load_scenarios(data_path("tiny4.csv"), net)
