import numpy as np
import pytest

from memdecay.core import AnnotationSet


def make_records(lags, responses, video="v0", participants=None):
    lags = np.asarray(lags, dtype=np.int64)
    if participants is None:
        participants = [f"p{i}" for i in range(len(lags))]
    return AnnotationSet.from_columns([video] * len(lags), participants, lags, np.asarray(responses, dtype=np.int64))


def random_instance(rng, n_lo=2, n_hi=500, lag_lo=9, lag_hi=200):
    n = int(rng.integers(n_lo, n_hi + 1))
    lags = rng.integers(lag_lo, lag_hi + 1, n)
    p = np.clip(rng.uniform(0.4, 1.0) + rng.uniform(-2e-3, 0.0) * (lags - 80), 0.0, 1.0)
    responses = (rng.random(n) < p).astype(np.int64)
    return make_records(lags, responses)


@pytest.fixture
def rng():
    return np.random.default_rng(20201017)


# ----------------------------------------------------------- acceptance report

_ACCEPTANCE = []


def pytest_runtest_makereport(item, call):
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    if call.when == "call" or (call.when == "setup" and call.excinfo is not None):
        if call.excinfo is None:
            status = "PASS"
        elif call.excinfo.errisinstance(pytest.skip.Exception):
            status = "SKIP"
        else:
            status = "FAIL"
        _ACCEPTANCE.append((status, marker.args[0]))


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for status, label in _ACCEPTANCE:
        terminalreporter.write_line(f"{status}  {label}")
