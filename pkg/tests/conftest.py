import numpy as np
import pytest

from primhd import spectral as sp
from primhd.initial import random_smooth


@pytest.fixture
def grid8():
    return sp.Grid.cube(8)


@pytest.fixture
def grid16():
    return sp.Grid.cube(16)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def pem16(grid16):
    return random_smooth(grid16, seed=0)


def random_samples(grid, rng, ncomp=None):
    shape = grid.shape if ncomp is None else (ncomp,) + grid.shape
    return rng.standard_normal(shape)


def random_band_limited(grid, rng, ncomp=None):
    """Real field with every mode inside the dealiased band and no Nyquist content."""
    c = sp.forward_transform(grid, random_samples(grid, rng, ncomp))
    return sp.dealias(grid, c)


#: one "[PASS]/[FAIL] criterion k" line per acceptance criterion run in this session
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split("criterion ")[1].split(":")[0])):
            terminalreporter.write_line(line)
