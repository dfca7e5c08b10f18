import numpy as np
import pytest

from trendcast.algebraic_estimator import build_degree1_kernels
from trendcast.series_core import SynthesisSpec, TimeSeries, synthesize_workload


@pytest.fixture(scope="session")
def synth10():
    return synthesize_workload(10, SynthesisSpec(), seed=3)


@pytest.fixture(scope="session")
def causal60():
    return build_degree1_kernels(60, 1, "causal_right_edge")


@pytest.fixture(scope="session")
def centered60():
    return build_degree1_kernels(60, 1, "centered")


@pytest.fixture
def affine():
    def make(a, b, n=400, start=0):
        t = start + np.arange(n)
        return TimeSeries(start, a + b * t)
    return make


_ACCEPTANCE_KEY = pytest.StashKey[list]()


@pytest.fixture(scope="session")
def acceptance_log(request):
    return request.config.stash.setdefault(_ACCEPTANCE_KEY, [])


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_ACCEPTANCE_KEY, [])
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(lines):
        terminalreporter.write_line(line)
