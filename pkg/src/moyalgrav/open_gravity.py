"""Moments, the resolvent W1, the open partition function and open Virasoro operators.

Moments are unnormalized: <1> = Z.  The resolvent carries z through the
signed variable ``zinv``; operators written in ``z`` act on it through
``DiffOperator.apply``.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from math import factorial

from gmpy2 import mpq

from .diffop import DiffOperator, compose_all
from .errors import TruncationTooSmall
from .gravity1d import dfact, virasoro_operator, z_terms
from .report import VerificationReport, Window, combine, compare, scalar_report, timer
from .series import L, LAM2, T, ZINV, Z, Series, TruncationSpec, safe_degree, substitute


class Family(str, Enum):
    TILDE = "tilde"
    OP_ON_W1 = "op"
    BAR_ON_W1 = "bar"


ALGEBRA_FAMILIES = ("closed", "tilde", "bar")


@dataclass
class OpenSeries:
    spec: TruncationSpec
    w1: Series | None = None
    zo: Series | None = None
    order: int = 0


def _closed(spec: TruncationSpec) -> TruncationSpec:
    return TruncationSpec(t_degree=spec.t_degree, n_max=spec.n_max)


def moment(n: int, spec: TruncationSpec) -> Series:
    """<x^n>(t), exact through the spec's t-degree."""
    if n < 0:
        raise ValueError("moment order must be non-negative")
    if n > spec.t_degree:
        raise TruncationTooSmall(f"moment {n} needs t_degree >= {n}")
    return z_terms(spec, insert=n)


def w1_spec(spec: TruncationSpec, z_order: int, extra: int = 0) -> TruncationSpec:
    return TruncationSpec(t_degree=spec.t_degree, n_max=spec.n_max,
                          aux=(("zinv", z_order + 1 + extra),))


def zo_spec(spec: TruncationSpec, l_order: int) -> TruncationSpec:
    return TruncationSpec(t_degree=spec.t_degree, n_max=spec.n_max, aux=(("l", l_order),))


def resolvent(spec: TruncationSpec, z_order: int) -> OpenSeries:
    """W1 = sum_{n <= z_order} <x^n> z^-(n+1)."""
    if z_order < 0 or z_order > spec.t_degree:
        raise TruncationTooSmall(f"z_order {z_order} must lie in 0..{spec.t_degree}")
    base = _closed(spec)
    ws = w1_spec(spec, z_order)
    w1 = Series.zero(ws)
    for n in range(z_order + 1):
        w1 = w1 + moment(n, base).embed(ws).mul_monomial({ZINV: n + 1})
    return OpenSeries(spec=ws, w1=w1, order=z_order)


def residue(w1: Series, n: int) -> Series:
    """Coefficient of z^-(n+1): the contour-residue rule."""
    return w1.slice(ZINV, n + 1)


def open_partition(spec: TruncationSpec, l_order: int) -> OpenSeries:
    """Z^o = sum_k l^k <x^k> / k!, i.e. <exp(l x)>."""
    if l_order < 0 or l_order > spec.t_degree:
        raise TruncationTooSmall(f"l_order {l_order} must lie in 0..{spec.t_degree}")
    base = _closed(spec)
    zs = zo_spec(spec, l_order)
    zo = Series.zero(zs)
    for k in range(l_order + 1):
        zo = zo + moment(k, base).embed(zs).mul_monomial({L: k}, mpq(1, factorial(k)))
    return OpenSeries(spec=zs, zo=zo, order=l_order)


# operators ---------------------------------------------------------------

def _lam_d(var, coeff=1) -> DiffOperator:
    return DiffOperator.term(coeff, {LAM2: 1}, {var: 1})


def closed_operator(m: int, spec: TruncationSpec) -> DiffOperator:
    return virasoro_operator(m, spec)


def tilde_operator(m: int, spec: TruncationSpec) -> DiffOperator:
    """L~_m = L_m + l lam2 (m+1)! d/dt_m, with L~_-1 = L_-1 + l."""
    op = virasoro_operator(m, spec)
    if m == -1:
        return op + DiffOperator.multiply(L)
    return op + DiffOperator.term(factorial(m + 1), {L: 1, LAM2: 1}, {T(m): 1})


def op_operator(m: int, spec: TruncationSpec, form: str = "direct") -> DiffOperator:
    """L^o_m acting on W1.

    ``direct``: L_m - (m+1)! lam2 d/dt_m d/dz (L_-1 - d/dz for m = -1).
    ``bz``: L_m + (lam2 d/dt0)^(m+1) (-d/dz).
    """
    op = virasoro_operator(m, spec)
    dz = DiffOperator.partial(Z)
    if form == "direct":
        if m == -1:
            return op - dz
        return op - DiffOperator.term(factorial(m + 1), {LAM2: 1}, {T(m): 1, Z: 1})
    if form == "bz":
        ops = [_lam_d(T(0))] * (m + 1) + [-dz]
        return op + compose_all(ops)
    raise ValueError(f"unknown form {form!r}")


def bar_operator(m: int) -> DiffOperator:
    """L-bar^o_m = (-d/dz)^(m+1) o (-z) + (-d/dz)^(m+1) lam2 d/dt0."""
    if m < -1:
        raise ValueError("L-bar^o_m is defined for m >= -1")
    tail = DiffOperator.multiply(Z, 1, -1) + _lam_d(T(0))
    return compose_all([-DiffOperator.partial(Z)] * (m + 1) + [tail])


def open_virasoro(m: int, family: Family | str, spec: TruncationSpec,
                  form: str = "direct") -> DiffOperator:
    family = Family(family)
    if m < -1:
        raise ValueError("open operators are defined for m >= -1")
    if family is Family.TILDE:
        return tilde_operator(m, spec)
    if family is Family.OP_ON_W1:
        return op_operator(m, spec, form)
    return bar_operator(m)


# verification ------------------------------------------------------------

def verify_moments(spec: TruncationSpec, n_max: int | None = None) -> VerificationReport:
    """<x^n>(0) = (n-1)!! lam^n and <x^n> = lam^2n d^n Z/dt0^n = n! lam2 dZ/dt_(n-1)."""
    t0 = timer()
    base = _closed(spec)
    top = spec.t_degree if n_max is None else n_max
    z = z_terms(base)
    coords = [T(k) for k in range(base.n_max + 1)]
    reps = []
    for n in range(top + 1):
        mo = moment(n, base)
        at0 = mo.at_zero(coords)
        want = Series.zero(base) if n % 2 else Series.monomial(base, {LAM2: n // 2}, dfact(n - 1))
        reps.append(compare(f"m{n}.at0", "", at0, want, Window(), None))
        safe = safe_degree(base, [n])
        reps.append(compare(f"m{n}.d0", "", mo, z.derive(T(0), n).mul_monomial({LAM2: n}),
                            Window(t_degree=safe), safe))
        if 1 <= n <= base.n_max + 1:
            safe1 = safe_degree(base, [1])
            bz = z.derive(T(n - 1)).mul_monomial({LAM2: 1}, factorial(n))
            reps.append(compare(f"m{n}.bz", "", mo, bz, Window(t_degree=safe1), safe1))
    rep = combine("open.moments", "Gaussian moments and their derivative forms", reps)
    rep.elapsed_ms = int((timer() - t0) * 1000)
    return rep


def verify_residues(spec: TruncationSpec, z_order: int, w: OpenSeries | None = None) -> VerificationReport:
    t0 = timer()
    w = w or resolvent(spec, z_order)
    base = _closed(spec)
    reps = [compare(f"n{n}", "", residue(w.w1, n),
                    moment(n, base).embed(w.spec), Window(), None)
            for n in range(w.order + 1)]
    rep = combine("open.residues", "residue extraction from W1 returns the moments", reps)
    rep.elapsed_ms = int((timer() - t0) * 1000)
    return rep


def verify_shift(spec: TruncationSpec, l_order: int, zo: OpenSeries | None = None) -> VerificationReport:
    """Z^o(l; t) = Z(t0 + l lam2; t_i) on monomials of total degree <= D."""
    t0 = timer()
    zo = zo or open_partition(spec, l_order)
    zs = zo.spec
    z = z_terms(_closed(spec)).embed(zs)
    shifted = substitute(z, T(0), Series.variable(zs, T(0)) + Series.monomial(zs, {L: 1, LAM2: 1}))
    return compare("open.shift", "open partition function as a shifted closed one",
                   zo.zo, shifted, Window(weight=spec.t_degree), spec.t_degree, started=t0)


def _index_window(m: int, spec: TruncationSpec) -> int:
    return spec.n_max - max(m, 0)


def verify_tilde(m: int, spec: TruncationSpec, l_order: int,
                 zo: OpenSeries | None = None) -> VerificationReport:
    t0 = timer()
    op = tilde_operator(m, spec)
    zo = zo or open_partition(spec, l_order)
    safe = safe_degree(spec, [1])
    res = op.apply(zo.zo)
    win = Window(t_degree=safe, max_index=_index_window(m, spec), var_max=((L, zo.order),))
    return compare(f"open.tilde.L{m}", "open constraint L~_m Z^o = 0", res,
                   Series.zero(zo.spec), win, safe, started=t0)


def verify_op_on_w1(m: int, spec: TruncationSpec, z_order: int,
                    w: OpenSeries | None = None) -> VerificationReport:
    """Both forms annihilate W1 and agree with each other."""
    t0 = timer()
    w = w or resolvent(spec, z_order)
    win_z = ((ZINV, w.order + 1),)
    safe = safe_degree(spec, [1])
    safe_bz = safe_degree(spec, [max(m + 1, 1)])
    zero = Series.zero(w.spec)
    direct = op_operator(m, spec, "direct").apply(w.w1)
    bz = op_operator(m, spec, "bz").apply(w.w1)
    idx = _index_window(m, spec)
    reps = [
        compare("direct", "", direct, zero, Window(t_degree=safe, max_index=idx, var_max=win_z), safe),
        compare("bz", "", bz, zero, Window(t_degree=safe_bz, max_index=idx, var_max=win_z), safe_bz),
        compare("forms", "", direct, bz, Window(t_degree=safe_bz, max_index=idx, var_max=win_z), safe_bz),
    ]
    rep = combine(f"open.op.L{m}", "open constraint L^o_m W1 = 0 in both forms", reps)
    rep.elapsed_ms = int((timer() - t0) * 1000)
    return rep


def verify_bar(m: int, spec: TruncationSpec, z_order: int,
               w: OpenSeries | None = None) -> VerificationReport:
    """L-bar^o_m W1 = 0, with the z^0 step kept; room is made for m+1 z-derivatives."""
    t0 = timer()
    w = w or resolvent(spec, z_order)
    big = w1_spec(spec, w.order, extra=m + 1)
    res = bar_operator(m).apply(w.w1.embed(big))
    safe = safe_degree(spec, [1])
    win = Window(t_degree=safe, var_max=((ZINV, w.order + 1 + m),))
    return compare(f"open.bar.L{m}", "reparametrization identity L-bar^o_m W1 = 0",
                   res, Series.zero(big), win, safe, started=t0)


def _generator(family: str, m: int, spec: TruncationSpec) -> DiffOperator:
    if family == "closed":
        return closed_operator(m, spec)
    if family == "tilde":
        return tilde_operator(m, spec)
    if family == "bar":
        return bar_operator(m)
    raise ValueError(f"unknown operator family {family!r}")


def algebra_residual(family: str, m: int, n: int, spec: TruncationSpec) -> DiffOperator:
    """[G_m, G_n] - (m-n) G_(m+n) in normal form, unrestricted."""
    a, b = _generator(family, m, spec), _generator(family, n, spec)
    return a.commutator(b) - _generator(family, m + n, spec).scale(m - n)


def verify_operator_algebra(family: str, m: int, n: int, spec: TruncationSpec) -> VerificationReport:
    """Closure on coupling indices <= N_max - 1, rechecked at N_max + 1."""
    t0 = timer()
    if family not in ALGEBRA_FAMILIES:
        raise ValueError(f"unknown operator family {family!r}")
    ident = f"algebra.{family}.{m}.{n}"
    anchor = "[G_m, G_n] = (m-n) G_(m+n)"
    if min(m, n, m + n) < -1:
        raise ValueError("indices must be >= -1")
    window = None
    if family != "bar":
        top = max(m, n, m + n) + 1
        if top > spec.n_max:
            raise TruncationTooSmall(f"{ident} needs n_max >= {top}")
        window = spec.n_max - 1
    res = algebra_residual(family, m, n, spec)
    if window is not None:
        res = res.restrict(window)
    ok = res.is_zero()
    fail = {}
    if not ok:
        key, c = res.sorted_items()[0]
        fail = {"monomial": _op_key_text(key), "expected": "0", "actual": str(c)}
    if ok and window is not None:
        # window stability: the same window computed with one more coupling
        bigger = spec.replace(n_max=spec.n_max + 1)
        res2 = algebra_residual(family, m, n, bigger).restrict(window)
        if not res2.is_zero():
            ok = False
            key, c = res2.sorted_items()[0]
            fail = {"monomial": "stability " + _op_key_text(key), "expected": "0", "actual": str(c)}
    rep = scalar_report(ident, anchor, ok, spec, started=t0, **fail)
    if window is not None:
        rep.window = {"max_index": window}
    return rep


def _op_key_text(key) -> str:
    mono, parts = key
    bits = [f"{v}^{e}" for v, e in mono] + [f"d[{v}]^{k}" for v, k in parts]
    return " * ".join(bits) or "1"
