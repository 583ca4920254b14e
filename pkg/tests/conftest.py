import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from cfp import kernels

settings.register_profile(
    "cfp",
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.filter_too_much, HealthCheck.data_too_large],
)
settings.load_profile("cfp")

ACCEPTANCE_LINES = []


@pytest.fixture(params=sorted(kernels.available()))
def backend(request):
    """Run the test once per importable kernel backend."""
    with kernels.use(request.param):
        yield request.param


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def acceptance_report():
    def report(criterion, ok, detail):
        line = f"{'PASS' if ok else 'FAIL'} criterion {criterion}: {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        return ok

    return report


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
