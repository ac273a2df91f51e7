"""Partition function and free energy of one-dimensional topological gravity."""

from __future__ import annotations

from dataclasses import dataclass
from math import factorial

from gmpy2 import double_fac, mpq

from .diffop import DiffOperator
from .errors import TruncationTooSmall
from .report import VerificationReport, Window, combine, compare, timer
from .series import LAM2, Series, T, TruncationSpec, log_adic, safe_degree


def dfact(n: int) -> int:
    """Double factorial with (-1)!! = 1."""
    if n < -1:
        raise ValueError("double factorial undefined below -1")
    return 1 if n <= 0 else int(double_fac(n))


@dataclass
class GravitySeries:
    z: Series
    m: Series
    spec: TruncationSpec


def gaussian_moment(n: int, spec: TruncationSpec | None = None) -> Series:
    """<x^n> of the unit Gaussian with variance lam2."""
    spec = spec or TruncationSpec(t_degree=0)
    if n < 0:
        raise ValueError("moment order must be non-negative")
    if n % 2:
        return Series.zero(spec)
    return Series.monomial(spec, {LAM2: n // 2}, dfact(n - 1))


def _check_1d(spec: TruncationSpec) -> None:
    if spec.tilde or spec.kappa or spec.kappa_pairs:
        raise ValueError("z1d needs a spec without tilde or kappa variables")
    if spec.t_degree == 0:
        raise TruncationTooSmall("z1d needs t_degree >= 1")


def z_terms(spec: TruncationSpec, insert: int = 0) -> Series:
    """The multi-sum for Z over (n_0, n_1, ...) truncated to the spec.

    ``insert`` adds x**insert under the integral, giving the unnormalized
    moment <x^insert> exactly at the full degree.
    """
    _check_1d(spec)
    D, N = spec.t_degree, spec.n_max
    fact = [factorial(k + 1) for k in range(N + 1)]
    terms = []

    def walk(k: int, exps: dict, deg: int, big_n: int, denom: int) -> None:
        if k > N:
            if big_n % 2 == 0:
                lam = (big_n - 2 * deg) // 2
                e = dict(exps)
                if lam:
                    e[LAM2] = lam
                terms.append((e, mpq(dfact(big_n - 1), denom)))
            return
        nk = 0
        d = denom
        while deg + nk <= D:
            if nk:
                exps[T(k)] = nk
                d *= nk * fact[k]
            walk(k + 1, exps, deg + nk, big_n + (k + 1) * nk, d)
            nk += 1
        exps.pop(T(k), None)

    walk(0, {}, 0, insert, 1)
    return Series.from_terms(spec, terms)


def z1d(spec: TruncationSpec) -> GravitySeries:
    z = z_terms(spec)
    return GravitySeries(z=z, m=log_adic(z), spec=spec)


def virasoro_operator(m: int, spec: TruncationSpec) -> DiffOperator:
    """L_m with coupling sums cut at index n_max."""
    if m < -1:
        raise ValueError("L_m is defined for m >= -1")
    N = spec.n_max
    if m + 1 > N:
        raise TruncationTooSmall(f"L_{m} needs n_max >= {m + 1}, have {N}")
    op = DiffOperator()

    def shifted(n: int) -> DiffOperator:
        # (t_n - delta_{n,1})
        out = DiffOperator.multiply(T(n))
        if n == 1:
            out = out - DiffOperator.scalar(1)
        return out

    if m == -1:
        op = DiffOperator.term(1, {T(0): 1, LAM2: -1})
        for n in range(1, N + 1):
            op = op + shifted(n) @ DiffOperator.partial(T(n - 1))
    elif m == 0:
        op = DiffOperator.scalar(1)
        for n in range(0, N + 1):
            op = op + (shifted(n) @ DiffOperator.partial(T(n))).scale(n + 1)
    else:
        op = DiffOperator.term(factorial(m + 1), {LAM2: 1}, {T(m - 1): 1})
        for n in range(0, N - m + 1):
            c = mpq(factorial(m + n + 1), factorial(n))
            op = op + (shifted(n) @ DiffOperator.partial(T(m + n))).scale(c)
    return op


def _gravity(spec: TruncationSpec, g: GravitySeries | None) -> GravitySeries:
    return g if g is not None else z1d(spec)


def verify_virasoro(m: int, spec: TruncationSpec, g: GravitySeries | None = None) -> VerificationReport:
    t0 = timer()
    op = virasoro_operator(m, spec)
    safe = safe_degree(spec, [1])
    g = _gravity(spec, g)
    res = op.apply(g.z)
    win = Window(t_degree=safe, max_index=spec.n_max - max(m, 0))
    return compare(f"virasoro.L{m}", "Virasoro constraint L_m Z = 0", res,
                   Series.zero(spec), win, safe, started=t0)


def verify_bz(n: int, spec: TruncationSpec, g: GravitySeries | None = None) -> VerificationReport:
    t0 = timer()
    if n < 1 or n > spec.n_max:
        raise TruncationTooSmall(f"BZ relation for n={n} needs 1 <= n <= n_max")
    safe = safe_degree(spec, [n + 1])
    z = _gravity(spec, g).z
    lhs = z.derive(T(n)).mul_monomial({LAM2: -n}, factorial(n + 1))
    rhs = z.derive(T(0), n + 1)
    return compare(f"burgers.bz.n{n}", "heat-type flow (n+1)! lam^-2n dZ/dt_n = d^(n+1)Z/dt0^(n+1)",
                   lhs, rhs, Window(t_degree=safe), safe, started=t0)


def hierarchy_chain(u: Series, n: int, dvar=T(0)) -> Series:
    """(d + u)^n u for commuting u."""
    b = u
    for _ in range(n):
        b = b.derive(dvar) + u * b
    return b


def verify_burgers_recurrence(n: int, spec: TruncationSpec,
                              g: GravitySeries | None = None) -> VerificationReport:
    t0 = timer()
    if n < 1 or n > spec.n_max:
        raise TruncationTooSmall(f"recurrence for n={n} needs 1 <= n <= n_max")
    g = _gravity(spec, g)
    M = g.m
    m0 = M.derive(T(0))
    mp = M.derive(T(n - 1))
    safe1 = safe_degree(spec, [2])
    lhs = M.derive(T(n)).mul_monomial({LAM2: -1}, n + 1)
    rhs = m0 * mp + mp.derive(T(0))
    r1 = compare(f"burgers.recurrence.n{n}", "", lhs, rhs, Window(t_degree=safe1), safe1)
    safe2 = safe_degree(spec, [1 + n])
    lhs2 = M.derive(T(n)).mul_monomial({LAM2: -n}, factorial(n + 1))
    rhs2 = hierarchy_chain(m0, n)
    r2 = compare(f"burgers.iterated.n{n}", "", lhs2, rhs2, Window(t_degree=safe2), safe2)
    rep = combine(f"burgers.recurrence.n{n}",
                  "free-energy recurrence and its iterated hierarchy form", [r1, r2])
    rep.elapsed_ms = int((timer() - t0) * 1000)
    return rep


def verify_cole_hopf_consistency(spec: TruncationSpec, g: GravitySeries | None = None) -> VerificationReport:
    """u = dM/dt0 solves 2/lam2 du/dt1 = u'' + 2 u u'."""
    t0 = timer()
    if spec.n_max < 1:
        raise TruncationTooSmall("needs t1")
    g = _gravity(spec, g)
    u = g.m.derive(T(0))
    safe = safe_degree(spec, [3])
    lhs = u.derive(T(1)).mul_monomial({LAM2: -1}, 2)
    up = u.derive(T(0))
    rhs = up.derive(T(0)) + (u * up).scale(2)
    return compare("burgers.cole_hopf", "Burgers equation for u = dM/dt0", lhs, rhs,
                   Window(t_degree=safe), safe, started=t0)


def verify_string_contraction(spec: TruncationSpec, g: GravitySeries | None = None) -> VerificationReport:
    """sum_n t_n x (recurrence n) collapses onto the n = 1 relation via the string equations."""
    t0 = timer()
    if spec.n_max < 1:
        raise TruncationTooSmall("needs t1")
    g = _gravity(spec, g)
    M = g.m
    N = spec.n_max
    m0 = M.derive(T(0))
    safe = safe_degree(spec, [2])
    lhs_sum = Series.zero(spec)
    rhs_sum = Series.zero(spec)
    for n in range(1, N + 1):
        tn = Series.variable(spec, T(n))
        lhs_sum = lhs_sum + (tn * M.derive(T(n))).mul_monomial({LAM2: -1}, n + 1)
        mp = M.derive(T(n - 1))
        rhs_sum = rhs_sum + tn * (m0 * mp + mp.derive(T(0)))
    t0s = Series.variable(spec, T(0))
    core = (-(t0s * m0) - 1).mul_monomial({LAM2: -1})
    lhs_closed = core + M.derive(T(1)).mul_monomial({LAM2: -1}, 2)
    rhs_closed = core + m0 * m0 + m0.derive(T(0))
    win = Window(t_degree=safe)
    reps = [compare("c1", "", lhs_sum, lhs_closed, win, safe),
            compare("c2", "", rhs_sum, rhs_closed, win, safe),
            compare("c3", "", lhs_sum - rhs_sum, lhs_closed - rhs_closed, win, safe)]
    rep = combine("burgers.string_contraction",
                  "string-equation contraction of the recurrence", reps)
    rep.elapsed_ms = int((timer() - t0) * 1000)
    return rep


def verify_string_reduction(spec: TruncationSpec, g: GravitySeries | None = None,
                            ms=(0, 1, 2, 3)) -> VerificationReport:
    """L_m Z = lam^(2(m+1)) d^(m+1)/dt0^(m+1) (L_-1 Z)."""
    t0 = timer()
    g = _gravity(spec, g)
    lm1 = virasoro_operator(-1, spec).apply(g.z)
    reps = []
    for m in ms:
        safe = safe_degree(spec, [m + 2])
        lhs = virasoro_operator(m, spec).apply(g.z)
        rhs = lm1.derive(T(0), m + 1).mul_monomial({LAM2: m + 1})
        win = Window(t_degree=safe, max_index=spec.n_max - m)
        reps.append(compare(f"m{m}", "", lhs, rhs, win, safe))
    rep = combine("burgers.string_reduction", "L_m Z reduces to derivatives of L_-1 Z", reps)
    rep.elapsed_ms = int((timer() - t0) * 1000)
    return rep


def verify_string_slices(spec: TruncationSpec, g_max: int,
                         g: GravitySeries | None = None) -> VerificationReport:
    """Genus-by-genus string equation: lam2 slices of the L_-1 residual on M."""
    t0 = timer()
    g = _gravity(spec, g)
    M = g.m
    safe = safe_degree(spec, [1])
    res = Series.monomial(spec, {T(0): 1, LAM2: -1})
    for n in range(1, spec.n_max + 1):
        d = M.derive(T(n - 1))
        res = res + Series.variable(spec, T(n)) * d
        if n == 1:
            res = res - d
    reps = []
    for genus in range(g_max + 1):
        sl = res.slice(LAM2, genus - 1)
        reps.append(compare(f"g{genus}", "", sl, Series.zero(spec), Window(t_degree=safe), safe))
    rep = combine("genus.string_slices", "genus-graded string equation", reps)
    rep.elapsed_ms = int((timer() - t0) * 1000)
    return rep


def moment_from_z(n: int, g: GravitySeries) -> Series:
    """n! lam2 dZ/dt_(n-1) at t = 0 (n >= 1), Z(0) for n = 0."""
    spec = g.spec
    z = g.z
    if n == 0:
        s = z
    else:
        s = z.derive(T(n - 1)).mul_monomial({LAM2: 1}, factorial(n))
    return s.at_zero([T(k) for k in range(spec.n_max + 1)])
