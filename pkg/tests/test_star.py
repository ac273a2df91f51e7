from __future__ import annotations

import pytest
from gmpy2 import mpq
from hypothesis import given, settings
from hypothesis import strategies as st

from moyalgrav.errors import NotAugmentationZero, NotUnit, TruncationTooSmall
from moyalgrav.series import KAPPA, KMN, LAM2, Series, T, TT
from moyalgrav.star import (StarContext, associativity_residual, commutator_star, exp_star,
                            log_star, poisson, star, verify_bch, verify_general_star_hierarchy,
                            verify_genus_split_tm, verify_normalization, verify_reduction,
                            verify_taylor_table, z_tm)

SMALL = StarContext.single().spec(weight=6, n_max=1, kappa_degree=3)


def m(spec, c=1, **e):
    names = {"t0": T(0), "t1": T(1), "tt0": TT(0), "tt1": TT(1), "k": KAPPA, "lam2": LAM2}
    return Series.monomial(spec, {names[k]: v for k, v in e.items()}, c)


def test_star_of_linear_couplings(single):
    # t0 * tt0 = t0 tt0 + kappa mu;  tt0 * t0 = tt0 t0 - kappa mu
    assert star(m(SMALL, t0=1), m(SMALL, tt0=1), single) \
        == m(SMALL, t0=1, tt0=1) + m(SMALL, k=1, lam2=1)
    assert star(m(SMALL, tt0=1), m(SMALL, t0=1), single) \
        == m(SMALL, t0=1, tt0=1) - m(SMALL, k=1, lam2=1)


def test_star_of_squares(single):
    got = star(m(SMALL, t0=2), m(SMALL, tt0=2), single)
    want = m(SMALL, t0=2, tt0=2) + m(SMALL, 4, t0=1, tt0=1, k=1, lam2=1) \
        + m(SMALL, 2, k=2, lam2=2)
    assert got == want


def test_commutator_examples(single):
    assert commutator_star(m(SMALL, t0=1), m(SMALL, tt0=1), single) == m(SMALL, 2, k=1, lam2=1)
    assert commutator_star(m(SMALL, t0=1), m(SMALL, t1=1), single).is_zero()
    f, g = m(SMALL, t0=2), m(SMALL, tt0=1)
    # at first order the commutator is 2 hbar times the Poisson bracket
    assert commutator_star(f, g, single) == poisson(f, g).mul_monomial({KAPPA: 1, LAM2: 1}, 2)


@st.composite
def star_series(draw):
    terms = []
    for a, b, c, d in draw(st.lists(st.tuples(*(st.integers(0, 2),) * 4), max_size=4)):
        terms.append(({T(0): a, TT(0): b, T(1): c, TT(1): d, LAM2: draw(st.integers(-1, 1))},
                      draw(st.integers(-3, 3))))
    return Series.from_terms(SMALL, terms)


@settings(max_examples=30, deadline=None)
@given(star_series(), star_series(), star_series())
def test_star_associative_and_bilinear(f, g, h):
    ctx = StarContext.single()
    assert associativity_residual(f, g, h, ctx).is_zero()
    assert star(f, g + h, ctx) == star(f, g, ctx) + star(f, h, ctx)
    assert star(Series.one(SMALL), f, ctx) == f


@settings(max_examples=20, deadline=None)
@given(star_series())
def test_exp_log_star_round_trip(f):
    ctx = StarContext.single()
    x = f - Series.constant(SMALL, f.constant_term())
    x = x.select(lambda k: x.layout.t_deg(k) > 0)
    assert log_star(exp_star(x, ctx), ctx) == x


def test_exp_star_errors(single):
    with pytest.raises(NotAugmentationZero):
        exp_star(Series.one(SMALL), single)
    with pytest.raises(NotUnit):
        log_star(Series.constant(SMALL, 2), single)


def test_taylor_table():
    assert verify_taylor_table().passed


def test_taylor_values():
    from moyalgrav.star import taylor_spec
    spec = taylor_spec()
    z = z_tm(spec, StarContext.single())
    assert z.coefficient({KAPPA: 2}) == mpq(1, 2)
    assert z.coefficient({T(0): 1, TT(0): 1, KAPPA: 1, LAM2: -1}) == 1
    assert z.coefficient({T(0): 3, TT(0): 3, KAPPA: 3, LAM2: -3}) == mpq(25, 24)


def test_normalization_and_reduction(star_spec, single, tm):
    assert verify_normalization(star_spec, single, tm).passed
    assert verify_reduction(star_spec, single, tm).passed
    z0 = tm.z.at_zero([v for v in star_spec.variables() if v.kind in ("t", "tt")])
    assert z0.coefficient({KAPPA: 2}) == mpq(1, 2)


def test_reduction_fault_injection(star_spec, single, tm):
    from dataclasses import replace
    bad = replace(tm, z=tm.z + m(star_spec, mpq(1, 9), t1=1, k=2))
    assert verify_reduction(star_spec, single, bad).status == "FAIL"


def test_bch(star_spec, single):
    assert verify_bch(star_spec, single, True).passed


def test_bch_needs_kappa3(single):
    spec = single.spec(weight=4, n_max=1, kappa_degree=2)
    with pytest.raises(TruncationTooSmall):
        verify_bch(spec, single)


def test_genus_split(star_spec, single, tm):
    m_tm = log_star(tm.z, single)
    assert verify_genus_split_tm(star_spec, single, tm, m_tm).passed
    bad = m_tm + m(star_spec, t0=2, tt0=1, k=1, lam2=-1)
    assert verify_genus_split_tm(star_spec, single, tm, bad).status == "FAIL"


@pytest.fixture(scope="module")
def general():
    ctx = StarContext.general([(0, 0), (0, 1), (1, 0), (1, 1)])
    spec = ctx.spec(weight=6, n_max=2, kappa_degree=2)
    return ctx, spec, z_tm(spec, ctx)


@pytest.mark.parametrize("pair", [(0, 0), (0, 1), (1, 0), (1, 1)])
def test_general_hierarchy(pair, general):
    ctx, spec, z = general
    assert verify_general_star_hierarchy(*pair, spec, ctx, z).passed


def test_general_hierarchy_fault_injection(general):
    ctx, spec, z = general
    bad = z + Series.monomial(spec, {KMN(0, 1): 1, T(0): 1, TT(0): 1})
    assert verify_general_star_hierarchy(0, 1, spec, ctx, bad).status == "FAIL"
    with pytest.raises(ValueError):
        verify_general_star_hierarchy(2, 2, spec, ctx, z)


def test_general_context_needs_pairs():
    with pytest.raises(ValueError):
        StarContext.general([])
