from __future__ import annotations

import pytest
from gmpy2 import mpq

from moyalgrav.errors import TruncationTooSmall
from moyalgrav.nc import (COORDS, NCData, covariant_derivative, field_strength_literal,
                          gauge_field, hier_coeff, verify_defining, verify_field_strength,
                          verify_flat_connection, verify_flip, verify_kappa0, verify_nc_burgers,
                          verify_nc_hierarchy, verify_nc_sto_printed, verify_tau)
from moyalgrav.series import KAPPA, LAM2, Series, T, TT
from moyalgrav.star import exp_star


@pytest.fixture(scope="module")
def gauge(ncd):
    return gauge_field(ncd)


@pytest.fixture(scope="module")
def bad_ncd(ncd):
    delta = Series.monomial(ncd.spec, {T(0): 2, TT(1): 1, KAPPA: 1, LAM2: -1}, mpq(1, 5))
    return NCData(tm=ncd.tm, m=ncd.m + delta, ctx=ncd.ctx)


def test_hier_coeff():
    assert hier_coeff(1) == (2, -1)
    assert hier_coeff(3) == (24, -3)


def test_log_star_inverts_z(ncd):
    assert exp_star(ncd.m, ncd.ctx) == ncd.tm.z


def test_covariant_derivative_of_commuting_free_energy(single, star_spec):
    # with no tilde dependence the adjoint series collapses to the plain derivative
    m = Series.monomial(star_spec, {T(0): 2, LAM2: -1}, mpq(1, 2))
    assert covariant_derivative(m, T(0), single) == m.derive(T(0))


def test_defining_relation(ncd):
    assert verify_defining(ncd).passed


def test_defining_relation_fails_for_kappa(ncd):
    # kappa also sits in the star kernel, so dZ/dkappa picks up extra terms
    assert verify_defining(ncd, [KAPPA]).status == "FAIL"


@pytest.mark.parametrize("pair", [(T(0), T(1)), (T(0), TT(0)), (T(1), TT(1)), (TT(0), TT(1))])
def test_flip(pair, ncd):
    assert verify_flip(ncd, *pair).passed


@pytest.mark.parametrize("tilde", [False, True])
def test_burgers(tilde, ncd):
    assert verify_nc_burgers(ncd, tilde).passed


@pytest.mark.parametrize("n", [1, 2, 3])
@pytest.mark.parametrize("tilde,left", [(False, False), (True, False), (False, True)])
def test_hierarchy(n, tilde, left, ncd):
    assert verify_nc_hierarchy(ncd, n, tilde, left).passed


def test_hierarchy_bounds(ncd):
    with pytest.raises(TruncationTooSmall):
        verify_nc_hierarchy(ncd, 4)


def test_sto_tau_and_commutative_limit(ncd):
    assert verify_nc_sto_printed(ncd).passed
    assert verify_tau(ncd).passed
    assert verify_kappa0(ncd).passed


def test_fault_injection(bad_ncd):
    assert verify_defining(bad_ncd).status == "FAIL"
    assert verify_nc_burgers(bad_ncd).status == "FAIL"
    assert verify_nc_hierarchy(bad_ncd, 1).status == "FAIL"


def test_field_strength_vanishes(ncd, gauge):
    assert verify_field_strength(ncd, gauge).passed
    assert verify_flat_connection(ncd).passed


def test_literal_field_strength_is_nonzero(gauge):
    # plain d/dt1 lacks the flow-time normalization and leaves a residual
    f = field_strength_literal("t0", "t1", gauge)
    assert not f.select(lambda k: f.layout.weight(k) <= gauge.exact["t1"] - 1).is_zero()


def test_field_strength_fault_injection(bad_ncd):
    g = gauge_field(bad_ncd)
    assert verify_field_strength(bad_ncd, g).status == "FAIL"


def test_gauge_coordinates():
    assert COORDS == ("t0", "t1", "tt0", "tt1")
