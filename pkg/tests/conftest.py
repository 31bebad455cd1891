import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")

# criterion number -> (passed, detail); filled by the acceptance tests
_CRITERIA = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(k): acceptance criterion number k")


@pytest.fixture
def criterion(request):
    """Record the outcome detail of an acceptance criterion.

    The PASS/FAIL decision comes from the test outcome itself; the detail
    string is whatever the test last reported.
    """
    marker = request.node.get_closest_marker("criterion")
    k = marker.args[0]
    _CRITERIA.setdefault(k, [None, ""])

    def note(detail):
        _CRITERIA[k][1] = detail

    return note


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    k = marker.args[0]
    entry = _CRITERIA.setdefault(k, [None, ""])
    if rep.when == "call" or (rep.when == "setup" and rep.failed):
        entry[0] = rep.passed
        if rep.failed and not entry[1]:
            entry[1] = str(rep.longrepr).strip().splitlines()[-1][:200]


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(_CRITERIA):
        ok, detail = _CRITERIA[k]
        word = "PASS" if ok else "FAIL"
        terminalreporter.write_line(f"{word} criterion {k:2d}: {detail}")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
