import numpy as np
import pytest

from pureconn import models


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def catalog():
    return {name: models.get_model(name) for name in models.MODEL_NAMES}


def random_spd(rng, n=4, spread=0.5):
    B = np.eye(n) + spread * rng.normal(size=(n, n)) / 2
    return B @ B.T + 0.1 * np.eye(n)


def assert_close_rel(actual, desired, rel):
    """max |actual - desired| <= rel * max |desired| (entrywise zeros in desired allowed)."""
    actual, desired = np.asarray(actual), np.asarray(desired)
    err = np.max(np.abs(actual - desired))
    assert err <= rel * np.max(np.abs(desired)), f"error {err:.3e} exceeds {rel:g} relative"


def pytest_terminal_summary(terminalreporter):
    import sys
    mod = sys.modules.get("test_acceptance")
    lines = sorted(getattr(mod, "RESULTS", []))
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
