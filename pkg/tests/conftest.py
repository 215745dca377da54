import math

import pytest
from hypothesis import settings

from quasisl import delta_interaction_problem, make_problem

settings.register_profile("quasisl", max_examples=25, deadline=None)
settings.load_profile("quasisl")


@pytest.fixture
def unit_pi():
    """-u'' on (0, pi)."""
    return make_problem(0.0, math.pi)


@pytest.fixture
def unit_one():
    return make_problem(0.0, 1.0)


@pytest.fixture
def half_line():
    """-u'' on (0, inf)."""
    return make_problem(0.0, math.inf)


@pytest.fixture
def delta_half():
    """Attractive point interaction of strength 1 at x = 1/2 on (0, 1)."""
    return delta_interaction_problem(1.0, 0.5)


def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance")
    if mod is None or not getattr(mod, "RESULTS", None):
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[n])
