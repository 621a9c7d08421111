import numpy as np
import pytest

from sethreat.features import assemble_dataset
from sethreat.synth import WorldConfig, calibrate_positive_share, make_world


@pytest.fixture(scope="session")
def paper_world():
    """Default-shaped world calibrated to the 0.613 positive share."""
    return make_world(calibrate_positive_share(WorldConfig(), 0.613, 0.02))


@pytest.fixture(scope="session")
def paper_datasets(paper_world):
    w = paper_world
    return {c: assemble_dataset(w.labels, c, w.graph, w.registry) for c in (1, 2, 3, 4)}


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# -- acceptance summary: one PASS/FAIL line per criterion ---------------------

_ACCEPTANCE: dict[str, str] = {}


def _criterion_title(nodeid: str) -> str:
    name = nodeid.rsplit("::", 1)[-1].removeprefix("test_criterion_")
    number, _, rest = name.partition("_")
    return f"criterion {number}: {rest.replace('_', ' ')}"


def pytest_runtest_logreport(report):
    if "test_acceptance.py::test_criterion_" not in report.nodeid:
        return
    title = _criterion_title(report.nodeid)
    if report.when == "call" or report.failed:
        _ACCEPTANCE[title] = "FAIL" if report.failed else ("SKIP" if report.skipped else "PASS")


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for title, outcome in sorted(_ACCEPTANCE.items(), key=lambda kv: int(kv[0].split()[1][:-1])):
        terminalreporter.write_line(f"{outcome} {title}")
