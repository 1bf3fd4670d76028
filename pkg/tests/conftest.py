import numpy as np
import pytest

#: one line per acceptance criterion, echoed after the test run
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)

from mfeit.forward import current_from_fourier
from mfeit.geometry import StarShape, circle, discretize, unit_circle_grid
from mfeit.potential import assemble
from mfeit.spectrum import compute_spectrum

R0 = 0.5
TREFOIL = StarShape(cos=(0.5, 0.0, 0.0, 0.08))


@pytest.fixture(scope="session")
def conc_kernels():
    return assemble(discretize(circle(R0), 256))


@pytest.fixture(scope="session")
def tre_kernels():
    return assemble(discretize(TREFOIL, 256))


@pytest.fixture(scope="session")
def conc_spectrum(conc_kernels):
    return compute_spectrum(conc_kernels, 24, n_boundary=64)


@pytest.fixture(scope="session")
def tre_spectrum(tre_kernels):
    return compute_spectrum(tre_kernels, 20, n_boundary=64, tail=1e-15)


@pytest.fixture(scope="session")
def bgrid64():
    return unit_circle_grid(64)


@pytest.fixture(scope="session")
def f_cos(bgrid64):
    return current_from_fourier([1.0], [], bgrid64)


def g_two_phase(r0: float) -> float:
    """Perfect-conductor trace amplitude for a concentric disk: u0 = g(r0) cos."""
    return (1 - r0 * r0) / (1 + r0 * r0)
