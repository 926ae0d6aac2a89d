import math
import warnings

import numpy as np
import pytest

from impa import network, paramp, taper

warnings.filterwarnings("ignore", message="The TBB threading layer")

GAMMA_MAX_10DB = 10 ** (-10 / 20)


@pytest.fixture(scope="session")
def design_spec():
    return taper.TaperDesignSpec(z_source=50.0, z_load=18.0, gamma_max=GAMMA_MAX_10DB, f_cutoff=2e9)


@pytest.fixture(scope="session")
def design_profile(design_spec):
    return taper.impedance_profile(design_spec)


@pytest.fixture(scope="session")
def design_grid():
    return network.FrequencyGrid.linspace(0.1e9, 12e9, 2001)


@pytest.fixture(scope="session")
def device():
    """Fitted device values: 69 pH, 4 pF, no lead inductance."""
    return paramp.PumpedResonator(capacitance=4e-12, josephson_inductance=69e-12)


def db20(x):
    return 20 * np.log10(np.abs(x))


def rel(a, b):
    return abs(a - b) / abs(b)


__all__ = ["GAMMA_MAX_10DB", "db20", "rel", "math"]


@pytest.fixture
def acceptance_log(request):
    """Collects one summary line per acceptance check for the terminal report."""
    lines = getattr(request.config, "_acceptance_lines", None)
    if lines is None:
        lines = request.config._acceptance_lines = []
    return lines


def pytest_terminal_summary(terminalreporter, config):
    lines = getattr(config, "_acceptance_lines", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
