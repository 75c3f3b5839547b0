import math
import warnings

import pytest
from hypothesis import HealthCheck, settings

from prodtail import dist as D

settings.register_profile(
    "default",
    deadline=None,
    max_examples=60,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.function_scoped_fixture],
)
settings.load_profile("default")


def _quiet(fn, *args, **kw):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", D.ConstructionWarning)
        return fn(*args, **kw)


@pytest.fixture(scope="session")
def zoo():
    """One validated instance of every family, shared across tests."""
    F0 = _quiet(D.make_oscillating_heavy, 1.55, 25.0)
    return {
        "exp": D.make_exponential(1.0),
        "exp_half": D.make_exponential(0.5),
        "pareto": D.make_power_law(2.0),
        "pareto_15": D.make_power_law(1.5),
        "point": D.make_point_mass(2.0),
        "exp_sqrt": D.exp_sqrt_tail(math.log(2.0)),
        "lattice": D.lattice_plateau(math.log(2.0)),
        "sin": D.make_sin_modulated(D.polynomial_exp_base(0.5, 3.0), 10.0),
        "osc": F0,
        "osc_tilt": D.make_tilt(F0, 0.5, 1.0),
        "osc_sqrt": D.make_tilt(F0, 0.5, 0.5),
        "gauss": D.gaussian_type(1.0),
    }


ACCEPTANCE_LINES = []


@pytest.fixture
def criterion(request):
    """Record one pass/fail line for an acceptance criterion, then assert it."""

    def record(number, title, ok, detail):
        line = f"criterion {number} [{'PASS' if ok else 'FAIL'}] {title}: {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        assert ok, line

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)
