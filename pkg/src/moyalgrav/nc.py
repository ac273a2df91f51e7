"""Covariant coupling derivatives, the noncommutative Burgers hierarchy and flatness."""

from __future__ import annotations

from dataclasses import dataclass, field
from math import factorial

from gmpy2 import mpq

from .errors import TruncationTooSmall
from .report import VerificationReport, Window, combine, compare, timer
from .series import LAM2, Series, T, TT, TruncationSpec, Var
from .star import (StarContext, TwoMatrix, ad_series, commutator_star, log_star, star,
                   two_matrix)


def covariant_derivative(m: Series, v: Var, ctx: StarContext) -> Series:
    """sum_k ad_m^k(dm/dv)/(k+1)!, so that d Exp*(m)/dv = (Dm/Dv) * Exp*(m)."""
    return ad_series(m, m.derive(v), ctx, lambda k: mpq(1, factorial(k + 1)))


def hier_coeff(n: int) -> tuple[int, int]:
    """(n+1)! and the lam2 power -n of the n-th flow normalization."""
    return factorial(n + 1), -n


def _scaled(s: Series, n: int) -> Series:
    c, e = hier_coeff(n)
    return s.mul_monomial({LAM2: e}, c) if e else s.scale(c)


@dataclass
class NCData:
    """Two-matrix free energy with lazily computed covariant derivatives."""

    tm: TwoMatrix
    m: Series
    ctx: StarContext
    _cov: dict = field(default_factory=dict)

    @property
    def spec(self) -> TruncationSpec:
        return self.m.spec

    @property
    def W(self) -> int:
        return self.spec.weight

    def cov(self, v: Var) -> Series:
        got = self._cov.get(v)
        if got is None:
            got = covariant_derivative(self.m, v, self.ctx)
            self._cov[v] = got
        return got

    def u(self, tilde: bool = False) -> Series:
        return self.cov(TT(0) if tilde else T(0))


def nc_data(spec: TruncationSpec, ctx: StarContext | None = None) -> NCData:
    ctx = ctx or StarContext.single()
    if spec.weight is None:
        raise ValueError("noncommutative checks need a weight-bounded spec")
    tm = two_matrix(spec, ctx)
    return NCData(tm=tm, m=log_star(tm.z, ctx), ctx=ctx)


def _weight_of(v: Var) -> int:
    return v.weight


def _window(W: int, loss: int) -> tuple[Window, int]:
    if W - loss < 0:
        raise TruncationTooSmall(f"weight window {W - loss} < 0")
    return Window(weight=W - loss), W - loss


def verify_defining(nd: NCData, variables=None) -> VerificationReport:
    """dZ/dv = (DM/Dv) * Z for each listed coupling.

    Defaults to the t and tt couplings.  Kappa variables also enter the star
    product itself, so the relation does not hold for them.
    """
    t0 = timer()
    spec = nd.spec
    if variables is None:
        variables = [v for v in spec.variables() if v.kind in ("t", "tt")]
    reps = []
    for v in variables:
        win, safe = _window(nd.W, _weight_of(v))
        lhs = nd.tm.z.derive(v)
        rhs = star(nd.cov(v), nd.tm.z, nd.ctx)
        reps.append(compare(str(v), "", lhs, rhs, win, safe))
    rep = combine("nc.covariant_defining", "dZ/dv = (DM/Dv) * Z", reps)
    rep.elapsed_ms = int((timer() - t0) * 1000)
    return rep


def flip_residual(nd: NCData, v1: Var, v2: Var) -> tuple[Series, Series]:
    d1, d2 = nd.cov(v1), nd.cov(v2)
    lhs = d2.derive(v1)
    rhs = d1.derive(v2) - commutator_star(d2, d1, nd.ctx)
    return lhs, rhs


def verify_flip(nd: NCData, v1: Var, v2: Var) -> VerificationReport:
    """d_v1 (DM/Dv2) = d_v2 (DM/Dv1) - [DM/Dv2, DM/Dv1]."""
    t0 = timer()
    win, safe = _window(nd.W, _weight_of(v1) + _weight_of(v2))
    lhs, rhs = flip_residual(nd, v1, v2)
    return compare(f"nc.flip.{v1}.{v2}", "mixed covariant derivatives", lhs, rhs, win, safe,
                   started=t0)


def chain(u: Series, n: int, ctx: StarContext, d0: Var = T(0), left: bool = False) -> Series:
    """B_n with B_0 = U and B_(k+1) = d0 B_k + B_k * U.

    ``left=True`` multiplies by U on the left instead: B_(k+1) = d0 B_k + U * B_k.
    """
    b = u
    for _ in range(n):
        b = b.derive(d0) + (star(u, b, ctx) if left else star(b, u, ctx))
    return b


def verify_nc_burgers(nd: NCData, tilde: bool = False) -> VerificationReport:
    """2/lam2 dU/dt1 = U'' + 2 U' * U - [U, U * U]."""
    t0 = timer()
    d0, d1 = (TT(0), TT(1)) if tilde else (T(0), T(1))
    if nd.spec.n_max < 1:
        raise TruncationTooSmall("NC Burgers needs t1")
    win, safe = _window(nd.W, 3)
    u = nd.u(tilde)
    up = u.derive(d0)
    lhs = _scaled(u.derive(d1), 1)
    rhs = up.derive(d0) + star(up, u, nd.ctx).scale(2) \
        - commutator_star(u, star(u, u, nd.ctx), nd.ctx)
    name = "nc.burgers.tilde" if tilde else "nc.burgers"
    return compare(name, "noncommutative Burgers equation", lhs, rhs, win, safe, started=t0)


def verify_nc_hierarchy(nd: NCData, n: int, tilde: bool = False,
                        left: bool = False) -> VerificationReport:
    """c_n dU/dt_n = d0 B_n - [U, B_n] and c_n DM/Dt_n = B_n."""
    t0 = timer()
    if n < 1 or n > nd.spec.n_max:
        raise TruncationTooSmall(f"hierarchy flow {n} needs 1 <= n <= n_max")
    d0, dn = (TT(0), TT(n)) if tilde else (T(0), T(n))
    u = nd.u(tilde)
    b = chain(u, n, nd.ctx, d0, left)
    win1, s1 = _window(nd.W, 2 + n)
    lhs = _scaled(u.derive(dn), n)
    rhs = b.derive(d0) - commutator_star(u, b, nd.ctx)
    r1 = compare("flow", "", lhs, rhs, win1, s1)
    win2, s2 = _window(nd.W, 1 + n)
    r2 = compare("covariant", "", _scaled(nd.cov(dn), n), b, win2, s2)
    name = f"nc.hierarchy{'.tilde' if tilde else ''}{'.left' if left else ''}.n{n}"
    rep = combine(name, "noncommutative Burgers hierarchy", [r1, r2])
    rep.elapsed_ms = int((timer() - t0) * 1000)
    return rep


def sto_printed_rhs(u: Series, ctx: StarContext, d0: Var = T(0)) -> Series:
    """Right side of the displayed n = 2 equation, term by term."""
    up = u.derive(d0)
    upp = up.derive(d0)
    u2 = star(u, u, ctx)
    u3 = star(u, u2, ctx)

    def br(a, b):
        return commutator_star(a, b, ctx)
    return upp.derive(d0) + star(up, u, ctx).derive(d0).scale(3) + star(up, u2, ctx).scale(3) \
        + br(u, upp) + star(br(u, up), u, ctx) + star(u, br(up, u), ctx) - br(u, u3)


def verify_nc_sto_printed(nd: NCData) -> VerificationReport:
    t0 = timer()
    if nd.spec.n_max < 2:
        raise TruncationTooSmall("needs t2")
    win, safe = _window(nd.W, 4)
    u = nd.u()
    return compare("nc.sto_printed", "displayed noncommutative STO equation",
                   _scaled(u.derive(T(2)), 2), sto_printed_rhs(u, nd.ctx), win, safe,
                   started=t0)


def verify_tau(nd: NCData) -> VerificationReport:
    """c_n dZ/dt_n = d0^(n+1) Z for both coupling families."""
    t0 = timer()
    z = nd.tm.z
    reps = []
    for tilde in (False, True):
        var = TT if tilde else T
        for n in range(1, nd.spec.n_max + 1):
            win, safe = _window(nd.W, n + 1)
            reps.append(compare(f"{var(n)}", "", _scaled(z.derive(var(n)), n),
                                z.derive(var(0), n + 1), win, safe))
    rep = combine("nc.tau", "Z^TM obeys the linear flows of both families", reps)
    rep.elapsed_ms = int((timer() - t0) * 1000)
    return rep


def verify_kappa0(nd: NCData) -> VerificationReport:
    """kappa^0 slices reduce to the commutative Burgers and STO equations."""
    t0 = timer()
    spec = nd.spec
    u = nd.u()
    uc = (nd.tm.m + nd.tm.mt).derive(T(0))
    reps = [compare("u", "", u, uc, Window(kappa_degree=0, weight=nd.W - 1), nd.W - 1)]
    # U at kappa = 0, as a commuting series
    u0 = u.select(Window(kappa_degree=0).predicate(spec))
    up = u0.derive(T(0))
    upp = up.derive(T(0))
    if spec.n_max >= 1:
        win, safe = _window(nd.W, 3)
        win = Window(weight=safe, kappa_degree=0)
        reps.append(compare("burgers", "", _scaled(u0.derive(T(1)), 1),
                            upp + (u0 * up).scale(2), win, safe))
    if spec.n_max >= 2:
        _, safe = _window(nd.W, 4)
        win = Window(weight=safe, kappa_degree=0)
        rhs = upp.derive(T(0)) + (up * u0).derive(T(0)).scale(3) + (up * u0 * u0).scale(3)
        reps.append(compare("sto", "", _scaled(u0.derive(T(2)), 2), rhs, win, safe))
        reps.append(compare("sto_printed", "", sto_printed_rhs(u, nd.ctx), rhs, win, safe))
    rep = combine("nc.kappa0", "commutative limits of the noncommutative flows", reps)
    rep.elapsed_ms = int((timer() - t0) * 1000)
    return rep


# gauge field ---------------------------------------------------------------

COORDS = ("t0", "t1", "tt0", "tt1")


@dataclass
class GaugeField:
    """Connection on (t_m, t_n, tt_m, tt_n).

    ``a`` maps coordinate names to components A_a = B_k built with the
    covariant recurrence; ``exact`` records the weight through which each
    component is exact.  The coordinate x^a for a coupling t_k is the flow
    time with d/dx^a = (k+1)!/lam^(2k) d/dt_k.
    """

    a: dict
    var: dict
    order: dict
    exact: dict
    ctx: StarContext

    def d(self, name: str, s: Series) -> Series:
        return _scaled(s.derive(self.var[name]), self.order[name])


def gauge_field(nd: NCData, m: int = 0, n: int = 1) -> GaugeField:
    if max(m, n) > nd.spec.n_max:
        raise TruncationTooSmall("gauge field index above n_max")
    a, var, order, exact = {}, {}, {}, {}
    names = {"t0": (False, m), "t1": (False, n), "tt0": (True, m), "tt1": (True, n)}
    for name, (tilde, k) in names.items():
        d0 = TT(0) if tilde else T(0)
        a[name] = chain(nd.u(tilde), k, nd.ctx, d0)
        var[name] = (TT if tilde else T)(k)
        order[name] = k
        exact[name] = nd.W - 1 - k
    return GaugeField(a=a, var=var, order=order, exact=exact, ctx=nd.ctx)


def field_strength(a: str, b: str, gauge: GaugeField) -> Series:
    """F_ab = d_a A_b - d_b A_a - [A_a, A_b]."""
    A = gauge.a
    return gauge.d(a, A[b]) - gauge.d(b, A[a]) - commutator_star(A[a], A[b], gauge.ctx)


def field_strength_literal(a: str, b: str, gauge: GaugeField) -> Series:
    """F_ab with plain coupling derivatives d/dt_k in place of the flow times."""
    A = gauge.a
    return A[b].derive(gauge.var[a]) - A[a].derive(gauge.var[b]) \
        - commutator_star(A[a], A[b], gauge.ctx)


def _fs_window(gauge: GaugeField, a: str, b: str) -> tuple[Window, int]:
    safe = min(gauge.exact[a], gauge.exact[b]) - 1
    if safe < 0:
        raise TruncationTooSmall("field strength window empty")
    return Window(weight=safe), safe


def verify_field_strength(nd: NCData, gauge: GaugeField | None = None) -> VerificationReport:
    t0 = timer()
    gauge = gauge or gauge_field(nd)
    zero = Series.zero(nd.spec)
    reps = []
    for i, a in enumerate(COORDS):
        for b in COORDS[i + 1:]:
            win, safe = _fs_window(gauge, a, b)
            f_ab = field_strength(a, b, gauge)
            reps.append(compare(f"F_{a}{b}", "", f_ab, zero, win, safe))
            reps.append(compare(f"F_{b}{a}", "", field_strength(b, a, gauge), -f_ab, win, safe))
    rep = combine("gauge.field_strength", "flatness of the noncommutative U(1) connection", reps)
    rep.elapsed_ms = int((timer() - t0) * 1000)
    return rep


def verify_flat_connection(nd: NCData) -> VerificationReport:
    """dUt/dt0 - dU/dtt0 - [U, Ut] = 0."""
    t0 = timer()
    win, safe = _window(nd.W, 2)
    u, ut = nd.u(), nd.u(True)
    res = ut.derive(T(0)) - u.derive(TT(0)) - commutator_star(u, ut, nd.ctx)
    return compare("gauge.flat_connection", "flat connection between the two families",
                   res, Series.zero(nd.spec), win, safe, started=t0)

