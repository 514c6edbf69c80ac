import math
import time

import pytest
from hypothesis import HealthCheck, settings

from torusglue.spectral import ThetaOperator, cokernel_gap, kernel_spectrum, reference_gap
from torusglue.vortex import CylinderGrid, VortexData, solve_vortex

settings.register_profile(
    "default",
    deadline=None,
    max_examples=60,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")

ACCEPTANCE_LINES: dict[int, str] = {}
# wall-clock seconds of the expensive shared computations
TIMINGS: dict[str, float] = {}


def timed(key, fn, *args):
    start = time.perf_counter()
    out = fn(*args)
    TIMINGS[key] = time.perf_counter() - start
    return out


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[k])


@pytest.fixture(scope="session")
def acceptance_lines():
    return ACCEPTANCE_LINES


@pytest.fixture(scope="session")
def timings():
    return TIMINGS


# shared backgrounds: the standard grid is T = 12 with 480 x 64 points


@pytest.fixture(scope="session")
def grid_std():
    return CylinderGrid(12.0, 480, 64)


def two_vortex(r):
    return VortexData.from_cylinder_points([(1.0, 0.0), (-1.0, math.pi)], r)


def vortex_of_degree(n, r=1.0):
    return {0: VortexData((), r), 1: VortexData((1,), r), 2: two_vortex(r)}[n]


@pytest.fixture(scope="session")
def sol_n1(grid_std):
    return timed("sol_n1", solve_vortex, VortexData((1,), 1.0), grid_std)


@pytest.fixture(scope="session")
def sol_n1_r2(grid_std):
    return timed("sol_n1_r2", solve_vortex, VortexData((1,), 2.0), grid_std)


@pytest.fixture(scope="session")
def sol_n2(grid_std):
    # zeros at (1, 0) and (-1, pi)
    return timed("sol_n2", solve_vortex, two_vortex(1.0), grid_std)


@pytest.fixture(scope="session")
def grid_small():
    return CylinderGrid(8.0, 129, 32)


# linearization spectra at r = 1 for n = 0, 1, 2 on a base grid, its refinement
# and a longer cylinder with the base spacing


SPECTRAL_GRIDS = {
    "base": CylinderGrid(8.0, 129, 32),
    "refined": CylinderGrid(8.0, 257, 64),
    "long": CylinderGrid(10.0, 161, 32),
}


class ThetaCase:
    def __init__(self, grid, n, reference):
        self.background = solve_vortex(vortex_of_degree(n), grid)
        self.op = ThetaOperator(self.background)
        self.spectrum = kernel_spectrum(self.op, reference=reference)
        self.cokernel_gap = cokernel_gap(self.op)


def _theta_cases():
    out = {}
    for name, grid in SPECTRAL_GRIDS.items():
        ref = reference_gap(grid, 1.0)
        for n in (0, 1, 2):
            out[name, n] = ThetaCase(grid, n, ref)
    return out


@pytest.fixture(scope="session")
def theta_cases():
    return timed("theta_cases", _theta_cases)
