import math

import pytest

from su11spec.config import load_config

C_UM_THZ = 299792.458  # c in um*THz


@pytest.fixture(scope="session")
def baseline():
    return load_config("baseline")


@pytest.fixture(scope="session")
def small(baseline):
    """Baseline physics on a coarse 128-point grid: fast, still a few THz wide."""
    return baseline.evolve(run__n_points=128, run__half_span_thz=6.0)


@pytest.fixture(scope="session")
def zero_gap(baseline):
    return baseline.evolve(gap__rods=(), pump__timing="gap", run__n_points=128, run__half_span_thz=30.0)


def omega_of_nm(nm):
    return 2 * math.pi * C_UM_THZ / (nm * 1e-3) * 1e12


# one PASS/FAIL line per acceptance criterion, printed after the run
_CRITERIA = pytest.StashKey[dict]()
N_CRITERIA = 8


def pytest_configure(config):
    config.stash[_CRITERIA] = {}


@pytest.fixture
def criterion(request):
    def report(n, ok, detail):
        request.config.stash[_CRITERIA][n] = f"CRITERION {n}: {'PASS' if ok else 'FAIL'}  {detail}"
        assert ok, detail
    return report


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash[_CRITERIA]
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for n in range(1, N_CRITERIA + 1):
        terminalreporter.write_line(lines.get(n, f"CRITERION {n}: FAIL  not reached (errored or deselected)"))
