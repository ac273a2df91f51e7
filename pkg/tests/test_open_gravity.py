from __future__ import annotations

import pytest
from gmpy2 import mpq

from moyalgrav.diffop import DiffOperator
from moyalgrav.errors import TruncationTooSmall
from moyalgrav.open_gravity import (ALGEBRA_FAMILIES, Family, OpenSeries, algebra_residual,
                                    bar_operator, moment, open_partition, open_virasoro,
                                    residue, resolvent, verify_bar, verify_moments,
                                    verify_op_on_w1, verify_operator_algebra, verify_residues,
                                    verify_shift, verify_tilde)
from moyalgrav.series import L, LAM2, T, ZINV, Series, TruncationSpec

ZO = 4


@pytest.fixture(scope="module")
def w(spec6):
    return resolvent(spec6, ZO)


@pytest.fixture(scope="module")
def zo(spec6):
    return open_partition(spec6, ZO)


def at0(s: Series) -> Series:
    return s.at_zero([T(k) for k in range(s.spec.n_max + 1)])


def test_moment_golden(spec6):
    assert at0(moment(2, spec6)) == Series.monomial(spec6, {LAM2: 1})
    assert at0(moment(4, spec6)) == Series.monomial(spec6, {LAM2: 2}, 3)
    assert at0(moment(3, spec6)).is_zero()
    assert moment(0, spec6).constant_term() == 1
    with pytest.raises(TruncationTooSmall):
        moment(7, spec6)
    with pytest.raises(ValueError):
        moment(-1, spec6)


def test_resolvent_golden(w):
    w1 = at0(w.w1)
    assert w1.coefficient({ZINV: 1}) == 1
    assert w1.coefficient({ZINV: 2}) == 0
    assert w1.coefficient({ZINV: 3, LAM2: 1}) == 1
    assert residue(w.w1, 4) == moment(4, TruncationSpec(t_degree=6, n_max=6)).embed(w.spec)


def test_open_partition_golden(zo):
    z = at0(zo.zo)
    assert z.coefficient({L: 2, LAM2: 1}) == mpq(1, 2)
    assert z.coefficient({L: 4, LAM2: 2}) == mpq(1, 8)
    assert z.coefficient({L: 1}) == 0


def test_moments_residues_shift(spec6, w, zo):
    assert verify_moments(spec6).passed
    assert verify_residues(spec6, ZO, w).passed
    assert verify_shift(spec6, ZO, zo).passed


@pytest.mark.parametrize("m", range(-1, 4))
def test_tilde_constraints(m, spec6, zo):
    assert verify_tilde(m, spec6, ZO, zo).passed


@pytest.mark.parametrize("m", range(-1, 4))
def test_op_constraints(m, spec6, w):
    assert verify_op_on_w1(m, spec6, ZO, w).passed


@pytest.mark.parametrize("m", range(0, 3))
def test_bar_constraints(m, spec6, w):
    assert verify_bar(m, spec6, ZO, w).passed


def test_bar_minus_one_fails(spec6, w):
    # documents the m = -1 reparametrization identity: the residual is -Z
    rep = verify_bar(-1, spec6, ZO, w)
    assert rep.status == "FAIL"
    assert rep.failure == {"monomial": "1", "expected": "0", "actual": "-1"}


def test_fault_injection(spec6, w, zo):
    bad_w = OpenSeries(spec=w.spec, w1=w.w1 + Series.monomial(w.spec, {T(1): 1, ZINV: 2}),
                       order=w.order)
    assert verify_op_on_w1(0, spec6, ZO, bad_w).status == "FAIL"
    assert verify_bar(0, spec6, ZO, bad_w).status == "FAIL"
    assert verify_residues(spec6, ZO, bad_w).status == "FAIL"
    bad_zo = OpenSeries(spec=zo.spec, zo=zo.zo + Series.monomial(zo.spec, {T(2): 1, L: 1}),
                        order=zo.order)
    assert verify_tilde(0, spec6, ZO, bad_zo).status == "FAIL"
    assert verify_shift(spec6, ZO, bad_zo).status == "FAIL"


def test_operator_families(spec6):
    assert open_virasoro(0, "bar", spec6) == bar_operator(0)
    assert open_virasoro(1, Family.OP_ON_W1, spec6, "bz") != open_virasoro(1, "op", spec6)
    with pytest.raises(ValueError):
        open_virasoro(-2, "tilde", spec6)
    with pytest.raises(ValueError):
        open_virasoro(0, "op", spec6, "weird")


@pytest.mark.parametrize("family", ALGEBRA_FAMILIES)
@pytest.mark.parametrize("m,n", [(-1, 0), (-1, 1), (0, 1), (1, 2)])
def test_operator_algebra(family, m, n, spec6):
    rep = verify_operator_algebra(family, m, n, spec6)
    assert rep.passed, rep.failure


def test_bar_algebra_is_exact():
    spec = TruncationSpec(t_degree=4, n_max=4)
    assert algebra_residual("bar", 1, -1, spec).is_zero()
    assert algebra_residual("bar", 2, 1, spec).is_zero()


def test_closed_algebra_needs_restriction(spec6):
    # the cut coupling sums leave debris at the top index only
    raw = algebra_residual("closed", -1, 2, spec6)
    assert not raw.is_zero()
    assert raw.restrict(spec6.n_max - 1).is_zero()


def test_algebra_fault_injection(spec6, monkeypatch):
    import moyalgrav.open_gravity as og
    real = og.closed_operator

    def skewed(m, spec):
        op = real(m, spec)
        return op + DiffOperator.scalar(1) if m == 1 else op
    monkeypatch.setattr(og, "closed_operator", skewed)
    rep = verify_operator_algebra("closed", 1, 0, spec6)
    assert rep.status == "FAIL" and rep.failure["monomial"] == "1"


def test_algebra_argument_errors(spec6):
    with pytest.raises(ValueError):
        verify_operator_algebra("open", 0, 1, spec6)
    with pytest.raises(ValueError):
        verify_operator_algebra("closed", -1, -1, spec6)
    with pytest.raises(TruncationTooSmall):
        verify_operator_algebra("closed", 3, 3, spec6)
