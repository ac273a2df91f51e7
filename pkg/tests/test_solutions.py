from __future__ import annotations

import pytest
import sympy as sp
from gmpy2 import mpq

from moyalgrav.errors import AnsatzError, TruncationTooSmall
from moyalgrav.series import LAM2, TAU, X, Series
from moyalgrav.solutions import (FAMILY, GG_PRINTED, bivariate_spec, classify_discriminant,
                                 cole_hopf, constant_coefficient_residual, gg_obstruction,
                                 gg_reduce_burgers, heat_kernel_theta, lam2, r, s, sto_theta,
                                 verify_cole_hopf, verify_gg_reduction, verify_heat_equation,
                                 verify_heat_mapping, verify_sto_mapping, verify_third_order, xi)

A0 = sp.Symbol("a0")
CORRECTED = {"a1": 1, "c": r - 2 * A0, "C": (r - A0) * A0 - s}


@pytest.fixture(scope="module")
def pde_spec():
    return bivariate_spec(6, 6)


@pytest.fixture(scope="module")
def heat(pde_spec):
    return heat_kernel_theta(pde_spec)


@pytest.fixture(scope="module")
def sto(pde_spec):
    return sto_theta(pde_spec)


def test_heat_kernel_golden(heat):
    assert heat.constant_term() == 1
    assert heat.coefficient({X: 2, LAM2: -1}) == mpq(1, 2)
    assert heat.coefficient({TAU: 1, LAM2: -1}) == 1


def test_sto_theta_golden(sto):
    assert sto.coefficient({TAU: 2, LAM2: -3}) == mpq(15, 2)
    assert sto.coefficient({X: 1, TAU: 1, LAM2: -2}) == 3
    assert sto.coefficient({TAU: 1}) == 0


def test_linear_equations(heat, sto):
    assert verify_heat_equation(heat).passed
    assert verify_third_order(sto).passed


def test_cole_hopf(heat, sto):
    assert verify_cole_hopf(heat, "burgers").passed
    assert verify_cole_hopf(sto, "sto").passed
    assert cole_hopf(heat).coefficient({X: 1, LAM2: -1}) == 1
    with pytest.raises(ValueError):
        verify_cole_hopf(heat, "kdv")


def test_cole_hopf_fault_injection(heat, pde_spec):
    bad = heat + Series.monomial(pde_spec, {X: 2, TAU: 1}, mpq(1, 3))
    assert verify_heat_equation(bad).status == "FAIL"
    assert verify_cole_hopf(bad, "burgers").status == "FAIL"


def test_mappings(heat, sto):
    assert verify_heat_mapping(heat, 6).passed
    assert verify_sto_mapping(sto, 6).passed


def test_mapping_fault_injection(sto, pde_spec):
    bad = sto + Series.monomial(pde_spec, {X: 1, TAU: 1, LAM2: -2})
    assert verify_sto_mapping(bad, 6).status == "FAIL"


def test_box_too_small():
    theta = heat_kernel_theta(bivariate_spec(1, 0))
    with pytest.raises(TruncationTooSmall):
        verify_heat_equation(theta)
    with pytest.raises(ValueError):
        bivariate_spec(-1, 2)


# (G'/G) algebra ------------------------------------------------------------

def test_gg_reduction_solution():
    red = gg_reduce_burgers()
    rel = {str(k): v for k, v in red.relations.items()}
    assert rel["a1"] == 1
    assert sp.expand(rel["c"] - CORRECTED["c"]) == 0
    assert sp.expand(rel["C"] - CORRECTED["C"]) == 0
    assert red.residual.is_zero()


def test_gg_reduction_with_negative_power():
    red = gg_reduce_burgers(-1, 1)
    rel = {str(k): v for k, v in red.relations.items()}
    assert rel["a1"] == 1 and rel["am1"] == 0
    assert red.residual.is_zero()


def test_gg_ansatz_errors():
    with pytest.raises(AnsatzError):
        gg_reduce_burgers(0, 2)
    with pytest.raises(AnsatzError):
        gg_reduce_burgers(2, 1)


def test_gg_corrected_relations_pass():
    assert verify_gg_reduction(CORRECTED).passed


def test_gg_printed_relations_fail():
    # documents the printed c and C: they disagree with the solved system
    rep = verify_gg_reduction()
    assert rep.status == "FAIL"
    assert rep.failure["monomial"] == "c"
    assert sp.expand(sp.sympify(GG_PRINTED["c"]) - CORRECTED["c"]) == s


def test_gg_obstruction_sign():
    # the printed minus sign fails; the plus sign holds identically
    assert gg_obstruction().status == "FAIL"
    assert gg_obstruction(sign=-1, a0=0).status == "FAIL"
    assert gg_obstruction(sign=1).passed
    assert gg_obstruction(sign=1, a0=0).passed


def test_constant_coefficient_residual():
    res = constant_coefficient_residual()
    assert res.coeff(xi, 2) == 1 / lam2 ** 2
    assert res.coeff(xi, 2) != 0


@pytest.mark.parametrize("rv,sv,want", [(0, 1, "Negative"), (2, 1, "Zero"), (3, 1, "Positive"),
                                        (mpq(1, 2), mpq(1, 16), "Zero")])
def test_classify_discriminant(rv, sv, want):
    assert classify_discriminant(rv, sv) == want
    assert want in FAMILY
