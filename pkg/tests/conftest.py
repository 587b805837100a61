import numpy as np
import pytest

from shrinkrank.projection import OrthoBasis, extend, project


def random_basis(rng, p, m):
    """Basis of ``m`` columns built by repeated extend() with random directions."""
    J = OrthoBasis(p)
    for _ in range(m):
        J = extend(J, project(J, rng.standard_normal(p)))
    return J


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE_LINES = {}


@pytest.fixture
def criterion(request):
    """Record a one-line verdict for an acceptance criterion.

    Usage: ``criterion(3, "distributional correctness", passed, "detail")``.
    """

    def record(number, title, passed, detail=""):
        status = "PASS" if passed else "FAIL"
        ACCEPTANCE_LINES[number] = f"[{status}] criterion {number:>2}: {title} -- {detail}"
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[number])
