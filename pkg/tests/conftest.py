import pytest

from recveq.cases import corpus_unit


@pytest.fixture(scope="session")
def fib():
    return corpus_unit("fib.mrc")


@pytest.fixture(scope="session")
def sums():
    return corpus_unit("sum.mrc")


@pytest.fixture(scope="session")
def corpus():
    names = ("fib.mrc", "sum.mrc", "switch.mrc", "redundant.mrc", "pascal.mrc", "loops.mrc")
    return {n: corpus_unit(n) for n in names}


_criteria = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n, title): acceptance criterion n")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    n, title = mark.args
    failed = rep.failed or (rep.when == "call" and rep.skipped)
    if rep.when == "call" or failed:
        _criteria[n] = ("FAIL" if failed or _criteria.get(n, ("PASS",))[0] == "FAIL" else "PASS",
                        title)


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_criteria):
        status, title = _criteria[n]
        terminalreporter.write_line(f"criterion {n}: {status}  {title}")
