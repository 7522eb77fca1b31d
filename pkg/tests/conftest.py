import os

import pytest

from vobj import corpus
from vobj.registry import Registry
from vobj.value import Ledger

os.environ.setdefault("VOO_BENCH_SEED", "7")

ACCEPTANCE_RESULTS: dict = {}


@pytest.fixture
def ledger():
    led = Ledger()
    with led.active():
        yield led


@pytest.fixture
def registry():
    return Registry()


@pytest.fixture
def loaded():
    """A registry holding every walkthrough class with bodies bound."""
    r = Registry()
    corpus.load(r, "person", "point", "voo-point", "shapes", "inventory")
    return r


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None or rep.when != "call" and not (rep.when == "setup" and rep.failed):
        return
    key = marker.args[0]
    prev = ACCEPTANCE_RESULTS.get(key, (marker.args[1], True))
    ACCEPTANCE_RESULTS[key] = (prev[0], prev[1] and rep.passed)


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n, title): acceptance criterion")


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_RESULTS):
        title, ok = ACCEPTANCE_RESULTS[key]
        tr.write_line(f"AC{key:<2} {'PASS' if ok else 'FAIL'}  {title}")
