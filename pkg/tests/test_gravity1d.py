from __future__ import annotations

import pytest
from gmpy2 import mpq

from moyalgrav.errors import TruncationTooSmall
from moyalgrav.gravity1d import (GravitySeries, dfact, gaussian_moment, moment_from_z,
                                 verify_burgers_recurrence, verify_bz,
                                 verify_cole_hopf_consistency, verify_string_contraction,
                                 verify_string_reduction, verify_string_slices,
                                 verify_virasoro, virasoro_operator, z1d)
from moyalgrav.series import LAM2, Series, T, TruncationSpec, log_adic


def corrupt(g: GravitySeries, exps, delta=1) -> GravitySeries:
    z = g.z + Series.monomial(g.spec, exps, delta)
    return GravitySeries(z=z, m=log_adic(z), spec=g.spec)


def test_dfact():
    assert [dfact(n) for n in (-1, 0, 1, 2, 5, 6)] == [1, 1, 1, 2, 15, 48]
    with pytest.raises(ValueError):
        dfact(-3)


def test_gaussian_moments():
    assert gaussian_moment(3).is_zero()
    assert gaussian_moment(0) == Series.one(TruncationSpec(t_degree=0))
    assert gaussian_moment(4).coefficient({LAM2: 2}) == 3


def test_z1d_golden(grav8):
    z = grav8.z
    assert z.constant_term() == 1
    assert z.coefficient({T(1): 2}) == mpq(3, 8)
    assert z.coefficient({T(0): 2, LAM2: -1}) == mpq(1, 2)
    assert z.coefficient({T(1): 1}) == mpq(1, 2)


def test_free_energy_lam_exponents(grav8):
    assert min(grav8.m.exponents(LAM2)) == -1


def test_z1d_needs_degree():
    with pytest.raises(TruncationTooSmall):
        z1d(TruncationSpec(t_degree=0, n_max=2))


def test_moments_from_z(grav8):
    for n in range(0, 9):
        got = moment_from_z(n, grav8)
        want = gaussian_moment(n).embed(grav8.spec) if n % 2 == 0 else Series.zero(grav8.spec)
        assert got == want


@pytest.mark.parametrize("m", range(-1, 5))
def test_virasoro_passes(m, spec8, grav8):
    assert verify_virasoro(m, spec8, grav8).passed


@pytest.mark.parametrize("m", range(-1, 5))
def test_virasoro_fault_injection(m, spec8, grav8):
    # every L_m with m <= 4 hits t5 through its t_{m+n} d/dt_{m+n} sum
    bad = corrupt(grav8, {T(0): 1, T(5): 1}, mpq(1, 7))
    rep = verify_virasoro(m, spec8, bad)
    assert rep.status == "FAIL"
    assert rep.failure["monomial"]


def test_virasoro_operator_domain(spec8):
    with pytest.raises(ValueError):
        virasoro_operator(-2, spec8)
    with pytest.raises(TruncationTooSmall):
        virasoro_operator(3, TruncationSpec(t_degree=4, n_max=3))


def test_virasoro_algebra_l1_lm1(spec8):
    l1, lm1, l0 = (virasoro_operator(m, spec8) for m in (1, -1, 0))
    assert l1.commutator(lm1).restrict(spec8.n_max - 1) == l0.scale(2).restrict(spec8.n_max - 1)


@pytest.mark.parametrize("n", range(1, 6))
def test_bz_and_recurrence(n, spec8, grav8):
    assert verify_bz(n, spec8, grav8).passed
    assert verify_burgers_recurrence(n, spec8, grav8).passed


def test_bz_safe_degree(spec8, grav8):
    assert verify_bz(5, spec8, grav8).safe_degree == 2


def test_bz_fault_injection(spec8, grav8):
    bad = corrupt(grav8, {T(1): 2})
    assert verify_bz(1, spec8, bad).status == "FAIL"
    assert verify_burgers_recurrence(1, spec8, bad).status == "FAIL"


def test_cole_hopf_and_contraction(spec8, grav8):
    assert verify_cole_hopf_consistency(spec8, grav8).passed
    assert verify_string_contraction(spec8, grav8).passed


def test_string_reduction_and_slices(spec8, grav8):
    assert verify_string_reduction(spec8, grav8).passed
    assert verify_string_slices(spec8, 4, grav8).passed
    # a bare t0 shift satisfies the reduction, t1^2 does not
    bad = corrupt(grav8, {T(1): 2})
    assert verify_string_reduction(spec8, bad).status == "FAIL"


def test_degree_too_small():
    spec = TruncationSpec(t_degree=3, n_max=3)
    with pytest.raises(TruncationTooSmall):
        verify_bz(3, spec)
