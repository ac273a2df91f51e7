from __future__ import annotations

from math import factorial

import pytest
from gmpy2 import mpq

from moyalgrav.errors import TruncationTooSmall
from moyalgrav.saddle import (M3_COEFFS, binomial_identity, genus_pieces, solve_saddle,
                              verify_genus_against_logz, verify_i_derivatives, verify_jacobian,
                              verify_t_from_i, verify_z_saddle_form)
from moyalgrav.series import LAM2, T, TruncationSpec


@pytest.fixture(scope="module")
def saddle6(spec6):
    return solve_saddle(spec6)


@pytest.fixture(scope="module")
def table6(spec6):
    return genus_pieces(spec6, 4)


def test_saddle_point_golden(saddle6):
    x = saddle6.x_inf
    assert x.coefficient({T(0): 1}) == 1
    assert x.coefficient({T(0): 1, T(1): 1}) == 1
    assert x.coefficient({T(0): 2, T(2): 1}) == mpq(1, 2)
    assert x.constant_term() == 0


@pytest.mark.parametrize("n", range(0, 13))
def test_binomial_identity(n):
    assert binomial_identity(n) == mpq(1, factorial(n + 1))


def test_binomial_identity_value():
    assert binomial_identity(5) == mpq(1, 720)


def test_saddle_verifiers_pass(spec6, saddle6):
    assert verify_i_derivatives(spec6, saddle6).passed
    assert verify_t_from_i(spec6, saddle6).passed
    assert verify_jacobian(spec6, saddle6).passed


def test_genus_golden(table6):
    assert table6[0].coefficient({T(0): 2}) == mpq(1, 2)
    assert table6[1].coefficient({T(1): 1}) == mpq(1, 2)
    assert table6[2].coefficient({T(3): 1}) == mpq(1, 8)


def test_genus_against_logz(spec6, grav6, table6, saddle6):
    reps = verify_genus_against_logz(spec6, 4, grav6, table6, saddle6)
    ids = [r.identity_id for r in reps]
    assert "genus.slice.g4" in ids and "genus.m2_iform" in ids
    assert all(r.passed for r in reps), [r.identity_id for r in reps if not r.passed]


def test_reassembly_matches_free_energy(spec6, grav6, table6):
    top = table6.reassemble()
    keep = lambda k: grav6.m.layout.exp(k, LAM2) <= 3  # noqa: E731
    assert top.select(keep) == grav6.m.select(keep)


def test_perturbed_genus3_coefficient_fails(spec6, grav6, saddle6):
    bad = dict(M3_COEFFS, b2=M3_COEFFS["b2"] + mpq(1, 100))
    table = genus_pieces(spec6, 3, m3=bad)
    reps = verify_genus_against_logz(spec6, 3, grav6, table, saddle6)
    failed = {r.identity_id for r in reps if not r.passed}
    assert "genus.slice.g3" in failed
    assert "genus.slice.g2" not in failed


def test_genus_out_of_range(spec6):
    with pytest.raises(ValueError):
        genus_pieces(spec6, 5)
    with pytest.raises(TruncationTooSmall):
        genus_pieces(TruncationSpec(t_degree=0, n_max=2), 1)


def test_corrected_saddle_form_passes(spec6, grav6):
    assert verify_z_saddle_form(spec6, g=grav6).passed


def test_printed_saddle_form_fails(spec8, grav8):
    # documents the printed weights: (N+1)!! disagrees with the direct expansion
    rep = verify_z_saddle_form(spec8, printed=True, g=grav8)
    assert rep.status == "FAIL"
    assert rep.failure["monomial"] == "t7^1 * lam2^3"
    assert rep.failure["expected"] == "1/384"
    assert rep.failure["actual"] == "3/128"
