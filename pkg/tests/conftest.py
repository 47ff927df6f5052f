import numpy as np
import pytest

ACCEPTANCE_LINES = []


@pytest.fixture
def rng(request):
    # seed derived from the test id so parametrized cases are reproducible
    seed = sum(map(ord, request.node.nodeid)) % (2**32)
    return np.random.default_rng(seed)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
