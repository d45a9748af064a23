import pytest

from hilbheis.curves import p1_quartet

# criterion number -> (description, outcome), filled from tests marked ``criterion``
_CRITERIA: dict[int, list] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, description): acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or rep.when not in ("setup", "call"):
        return
    number, desc = mark.args
    entry = _CRITERIA.setdefault(number, [desc, "PASS"])
    if rep.failed or (rep.when == "setup" and rep.skipped):
        entry[1] = "FAIL"


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        desc, status = _CRITERIA[number]
        terminalreporter.write_line(f"[{status}] criterion {number}: {desc}")


@pytest.fixture(scope="session")
def p1_6():
    return p1_quartet(6)
