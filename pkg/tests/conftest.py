import numpy as np
import pytest

from bellpurify import priors


@pytest.fixture
def rng():
    return np.random.default_rng(20001009)


@pytest.fixture(scope="session")
def uniform_werner():
    return priors.uniform_fidelity_prior(512)


def random_simplex(rng, size):
    return rng.dirichlet(np.ones(4), size=size)


_CRITERIA: dict[int, tuple[str, list[str]]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.outcome != "passed"):
        return
    for key, value in report.user_properties:
        if key == "criterion":
            number, title = value
            _CRITERIA.setdefault(number, (title, []))[1].append(report.outcome)


def pytest_runtest_setup(item):
    marker = item.get_closest_marker("criterion")
    if marker is not None:
        item.user_properties.append(("criterion", tuple(marker.args)))


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        title, outcomes = _CRITERIA[number]
        status = "PASS" if outcomes and all(o == "passed" for o in outcomes) else "FAIL"
        terminalreporter.write_line(f"criterion {number:2d} {status}  {title}")
