from __future__ import annotations

import sys

import pytest

from moyalgrav.gravity1d import z1d
from moyalgrav.nc import nc_data
from moyalgrav.series import TruncationSpec
from moyalgrav.star import StarContext, two_matrix


@pytest.fixture(scope="session")
def spec8():
    return TruncationSpec(t_degree=8, n_max=8)


@pytest.fixture(scope="session")
def grav8(spec8):
    return z1d(spec8)


@pytest.fixture(scope="session")
def spec6():
    return TruncationSpec(t_degree=6, n_max=6)


@pytest.fixture(scope="session")
def grav6(spec6):
    return z1d(spec6)


@pytest.fixture(scope="session")
def single():
    return StarContext.single()


@pytest.fixture(scope="session")
def star_spec(single):
    return single.spec(weight=8, n_max=3, kappa_degree=3)


@pytest.fixture(scope="session")
def tm(star_spec, single):
    return two_matrix(star_spec, single)


@pytest.fixture(scope="session")
def ncd(star_spec, single):
    return nc_data(star_spec, single)



def pytest_terminal_summary(terminalreporter):
    mod = next((m for name, m in list(sys.modules.items())
                if name.rsplit(".", 1)[-1] == "test_acceptance"), None)
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
