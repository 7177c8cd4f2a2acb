import pytest

from compact_euler.alpha import solve_alpha
from compact_euler.field import Flow
from compact_euler.localization import make_bump
from compact_euler.profiles import build_profiles
from compact_euler.psi import solve_psi


@pytest.fixture(scope="session")
def psi20():
    return solve_psi(20)


@pytest.fixture(scope="session")
def profiles20(psi20):
    return build_profiles(psi20, 20)


@pytest.fixture(scope="session")
def alpha20(profiles20):
    return solve_alpha(profiles20, 20)


@pytest.fixture(scope="session")
def flow1(alpha20, profiles20):
    return Flow(alpha20, profiles20.H, 1.0)


@pytest.fixture(scope="session")
def flow2(alpha20, profiles20):
    return Flow(alpha20, profiles20.H, 2.0)


@pytest.fixture(scope="session")
def bump005():
    return make_bump(0.005)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for n in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[n])
