from __future__ import annotations

from hypothesis import given, settings
from hypothesis import strategies as st

from moyalgrav.diffop import DiffOperator, compose_all
from moyalgrav.series import LAM2, Series, T, TruncationSpec, Z, ZINV

X0, X1 = T(0), T(1)


def x(v, e=1):
    return DiffOperator.multiply(v, e)


def d(v, n=1):
    return DiffOperator.partial(v, n)


@st.composite
def operators(draw):
    op = DiffOperator()
    for _ in range(draw(st.integers(1, 3))):
        mono = {X0: draw(st.integers(0, 2)), X1: draw(st.integers(0, 1))}
        parts = {X0: draw(st.integers(0, 2)), X1: draw(st.integers(0, 1))}
        op = op + DiffOperator.term(draw(st.integers(-3, 3)), mono, parts)
    return op


def test_heisenberg():
    assert d(X0).commutator(x(X0)) == DiffOperator.scalar(1)
    assert d(X0).commutator(x(X1)).is_zero()


def test_leibniz_reordering():
    # d^2 x^2 = x^2 d^2 + 4 x d + 2
    want = DiffOperator.term(1, {X0: 2}, {X0: 2}) + DiffOperator.term(4, {X0: 1}, {X0: 1}) \
        + DiffOperator.scalar(2)
    assert d(X0, 2) @ x(X0, 2) == want


@settings(max_examples=40, deadline=None)
@given(operators(), operators(), operators())
def test_composition_is_associative(a, b, c):
    assert (a @ b) @ c == a @ (b @ c)


@settings(max_examples=40, deadline=None)
@given(operators(), operators(), operators())
def test_jacobi_and_antisymmetry(a, b, c):
    assert a.commutator(b) == -b.commutator(a)
    jac = a.commutator(b.commutator(c)) + b.commutator(c.commutator(a)) \
        + c.commutator(a.commutator(b))
    assert jac.is_zero()


@settings(max_examples=30, deadline=None)
@given(operators(), operators())
def test_apply_respects_composition(a, b):
    spec = TruncationSpec(t_degree=10, n_max=1)
    s = Series.from_terms(spec, [({X0: i, X1: j}, i + 2 * j + 1)
                                 for i in range(4) for j in range(3)])
    lhs = (a @ b).apply(s)
    rhs = a.apply(b.apply(s))
    pred = lambda k: lhs.layout.t_deg(k) <= 5  # noqa: E731
    assert lhs.select(pred) == rhs.select(pred)


def test_z_acts_through_zinv():
    spec = TruncationSpec(t_degree=0, aux=(("zinv", 6),))
    w = Series.monomial(spec, {ZINV: 2})  # z^-2
    assert d(Z).apply(w) == Series.monomial(spec, {ZINV: 3}, -2)
    assert x(Z).apply(w) == Series.monomial(spec, {ZINV: 1})
    assert x(Z, 3).apply(w) == Series.monomial(spec, {ZINV: -1})


def test_restrict_drops_high_indices():
    op = x(T(3)) @ d(T(1)) + DiffOperator.term(2, {LAM2: 1}, {T(0): 1})
    assert op.restrict(2) == DiffOperator.term(2, {LAM2: 1}, {T(0): 1})


def test_compose_all():
    assert compose_all([d(X0)] * 3) == d(X0, 3)
