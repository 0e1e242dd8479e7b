import numpy as np
import pytest

from willmore.providers import (conformal_bump, conformal_quadratic,
                                conformal_two_bump, euclidean, round_s3,
                                schwarzschild)
from willmore.spectral import get_grid

# one criterion -> one line in the terminal summary
ACCEPTANCE_LINES = {}


def record_criterion(num, label, ok, detail, sub=""):
    ACCEPTANCE_LINES[(num, sub)] = (label, bool(ok), detail)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for num, sub in sorted(ACCEPTANCE_LINES):
        label, ok, detail = ACCEPTANCE_LINES[(num, sub)]
        status = "PASS" if ok else "FAIL"
        terminalreporter.write_line(
            f"criterion {num:2d}{sub} [{status}] {label}: {detail}"
        )


@pytest.fixture(scope="session")
def grid8():
    return get_grid(8)


@pytest.fixture(scope="session")
def grid12():
    return get_grid(12)


@pytest.fixture(scope="session")
def grid16():
    return get_grid(16)


@pytest.fixture(scope="session")
def flat():
    return euclidean()


@pytest.fixture(scope="session")
def sphere3():
    return round_s3(1.0)


@pytest.fixture(scope="session")
def schw():
    return schwarzschild(1.0)


@pytest.fixture(scope="session")
def quad():
    return conformal_quadratic(-0.02)


@pytest.fixture(scope="session")
def bump():
    return conformal_bump(0.1, 1.0)


@pytest.fixture(scope="session")
def two_bump():
    return conformal_two_bump(0.1, 0.05, 1.0, (1.0, 0.0, 0.0))


@pytest.fixture()
def rng():
    return np.random.default_rng(20260822)
