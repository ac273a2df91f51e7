"""Saddle point, the I_n coordinates and the genus expansion of the free energy."""

from __future__ import annotations

from dataclasses import dataclass, field
from math import factorial

from gmpy2 import mpq

from .errors import TruncationTooSmall
from .gravity1d import GravitySeries, dfact, z1d
from .report import VerificationReport, Window, combine, compare, scalar_report, timer
from .series import (LAM2, Series, T, TruncationSpec, exp_adic, invert_unit, log_adic,
                     power, safe_degree)

# printed ansatz coefficients for the genus-3 and genus-4 free energies
M3_COEFFS = {"a1": mpq(1, 6), "a2": mpq(-4, 9),
             "b1": mpq(-1, 9), "b2": mpq(5, 27), "b3": mpq(-2, 27)}
M4_COEFFS = (
    (mpq(1, 8), mpq(-1, 2), mpq(-2, 5)),
    (mpq(-5, 24), mpq(7, 36), mpq(-82, 135), mpq(31, 45)),
    (mpq(7, 72), mpq(-13, 45), mpq(217, 810), mpq(-32, 405)),
)
MAX_GENUS = 4


@dataclass
class SaddleData:
    x_inf: Series
    i_vars: list
    spec: TruncationSpec
    powers: list = field(default_factory=list)  # x_inf^m / m!


@dataclass
class GenusTable:
    entries: dict
    spec: TruncationSpec

    def __getitem__(self, g: int) -> Series:
        return self.entries[g]

    def reassemble(self) -> Series:
        out = Series.zero(self.spec)
        for g, s in self.entries.items():
            out = out + s.mul_monomial({LAM2: g - 1})
        return out


def _scaled_powers(x: Series, top: int) -> list[Series]:
    spec = x.spec
    out = [Series.one(spec)]
    for m in range(1, top + 1):
        out.append((out[-1] * x).scale(mpq(1, m)))
    return out


def _coupling_sum(spec: TruncationSpec, powers: list[Series], offset: int) -> Series:
    """sum_m t_(offset+m) powers[m]."""
    out = Series.zero(spec)
    for m in range(0, spec.n_max - offset + 1):
        out = out + powers[m].mul_monomial({T(offset + m): 1})
    return out


def solve_saddle(spec: TruncationSpec) -> SaddleData:
    """x = sum t_n x^n/n! by fixed-point iteration, plus I_0..I_N."""
    N = spec.n_max
    if N < 0:
        raise TruncationTooSmall("saddle point needs couplings")
    x = Series.zero(spec)
    for _ in range(spec.t_degree):
        x = _coupling_sum(spec, _scaled_powers(x, N), 0)
    powers = _scaled_powers(x, N + 1)
    i_vars = [_coupling_sum(spec, powers, n) for n in range(N + 1)]
    return SaddleData(x_inf=x, i_vars=i_vars, spec=spec, powers=powers)


def action_at_saddle(sd: SaddleData) -> Series:
    """S(x_inf) = -x^2/2 + sum t_n x^(n+1)/(n+1)!."""
    spec = sd.spec
    out = -sd.powers[2]
    for n in range(spec.n_max + 1):
        out = out + sd.powers[n + 1].mul_monomial({T(n): 1})
    return out


def _i(sd: SaddleData, n: int) -> Series:
    return sd.i_vars[n] if n < len(sd.i_vars) else Series.zero(sd.spec)


def verify_i_derivatives(spec: TruncationSpec, sd: SaddleData | None = None) -> VerificationReport:
    t0 = timer()
    sd = sd or solve_saddle(spec)
    safe = safe_degree(spec, [1])
    win = Window(t_degree=safe)
    one_minus = 1 - _i(sd, 1)
    reps = [compare("x", "", sd.x_inf.derive(T(0)) * one_minus, Series.one(spec), win, safe)]
    for n in range(1, spec.n_max + 1):
        reps.append(compare(f"I{n}", "", _i(sd, n).derive(T(0)) * one_minus,
                            _i(sd, n + 1), win, safe))
    reps.append(compare("unit", "", one_minus * invert_unit(one_minus), Series.one(spec),
                        Window(t_degree=spec.t_degree), spec.t_degree))
    rep = combine("saddle.i_derivatives", "t0-derivatives of x_inf and I_n", reps)
    rep.elapsed_ms = int((timer() - t0) * 1000)
    return rep


def binomial_identity(n: int) -> mpq:
    """sum_k (-1)^k / ((k+1)! (n-k)!)."""
    return sum((mpq((-1) ** k, factorial(k + 1) * factorial(n - k)) for k in range(n + 1)),
               mpq(0))


def t_from_i(sd: SaddleData, n: int) -> Series:
    """t_n = sum_k (-1)^k I0^k/k! I_(k+n) evaluated on the I-series."""
    spec = sd.spec
    i0 = sd.i_vars[0]
    out = Series.zero(spec)
    pw = Series.one(spec)
    for k in range(0, spec.n_max - n + 1):
        if k:
            pw = (pw * i0).scale(mpq(-1, k))
        out = out + pw * _i(sd, k + n)
    return out


def verify_t_from_i(spec: TruncationSpec, sd: SaddleData | None = None,
                    binomial_max: int = 12) -> VerificationReport:
    t0 = timer()
    sd = sd or solve_saddle(spec)
    safe = safe_degree(spec, [])
    win = Window(t_degree=safe)
    reps = [compare(f"t{n}", "", t_from_i(sd, n), Series.variable(spec, T(n)), win, safe)
            for n in range(spec.n_max + 1)]
    for n in range(binomial_max + 1):
        val, want = binomial_identity(n), mpq(1, factorial(n + 1))
        reps.append(scalar_report(f"binom{n}", "", val == want, spec, str(want), str(val)))
    rep = combine("saddle.t_from_i", "inversion t_n(I) and the binomial identity", reps)
    rep.elapsed_ms = int((timer() - t0) * 1000)
    return rep


def verify_jacobian(spec: TruncationSpec, sd: SaddleData | None = None) -> VerificationReport:
    """sum_m dt_n/dI_m dI_m/dt_k = delta_nk from the closed Jacobians."""
    t0 = timer()
    sd = sd or solve_saddle(spec)
    N = spec.n_max
    i0 = sd.i_vars[0]
    inv = invert_unit(1 - _i(sd, 1))
    pw = _scaled_powers(i0, N)
    neg = [p.scale((-1) ** m) for m, p in enumerate(pw)]

    def dt_di(n: int, m: int) -> Series:
        out = neg[m - n] if m >= n else Series.zero(spec)
        if m == 0 and n + 1 <= N:
            out = out - Series.variable(spec, T(n + 1))
        return out

    def di_dt(m: int, k: int) -> Series:
        out = pw[k - m] if k >= m else Series.zero(spec)
        return out + _i(sd, m + 1) * inv * pw[k]

    safe = safe_degree(spec, [])
    win = Window(t_degree=safe)
    reps = []
    for n in range(N + 1):
        for k in range(N + 1):
            acc = Series.zero(spec)
            for m in range(N + 1):
                acc = acc + dt_di(n, m) * di_dt(m, k)
            reps.append(compare(f"{n},{k}", "", acc,
                                Series.one(spec) if n == k else Series.zero(spec), win, safe))
    rep = combine("saddle.jacobian", "t <-> I Jacobians contract to the identity", reps)
    rep.elapsed_ms = int((timer() - t0) * 1000)
    return rep


# genus expansion ------------------------------------------------------------

def _genus_work(spec: TruncationSpec, g_max: int, m3=None, m4=None) -> dict[int, Series]:
    """Closed forms evaluated in a spec deep enough for g_max derivative pairs."""
    if not 0 <= g_max <= MAX_GENUS:
        raise ValueError(f"genus must lie in 0..{MAX_GENUS}")
    m3 = m3 or M3_COEFFS
    m4 = m4 or M4_COEFFS
    work = spec.replace(t_degree=spec.t_degree + 2 * g_max)
    sd = solve_saddle(work)
    d0 = T(0)
    M0 = action_at_saddle(sd)
    out = {0: M0}
    if g_max == 0:
        return out
    A = M0.derive(d0, 2)
    Ainv = invert_unit(A)
    M1 = log_adic(A).scale(mpq(1, 2))
    out[1] = M1
    if g_max == 1:
        return out
    p1 = M1.derive(d0)
    pp1 = p1.derive(d0)
    M2 = Ainv * (pp1.scale(mpq(1, 4)) - (p1 * p1).scale(mpq(1, 6)))
    out[2] = M2
    if g_max == 2:
        return out
    p2 = M2.derive(d0)
    pp2 = p2.derive(d0)
    p1sq = p1 * p1
    Ainv2 = Ainv * Ainv
    M3 = Ainv * (pp2.scale(m3["a1"]) + (p1 * p2).scale(m3["a2"])) \
        + Ainv2 * ((pp1 * pp1).scale(m3["b1"]) + (pp1 * p1sq).scale(m3["b2"])
                   + (p1sq * p1sq).scale(m3["b3"]))
    out[3] = M3
    if g_max == 3:
        return out
    p3 = M3.derive(d0)
    pp3 = p3.derive(d0)
    c1, c2, c3 = m4
    first = pp3.scale(c1[0]) + (p1 * p3).scale(c1[1]) + (p2 * p2).scale(c1[2])
    second = (pp1 * pp2).scale(c2[0]) + (p1sq * pp2).scale(c2[1]) \
        + (p1sq * p1 * p2).scale(c2[2]) + (p1 * pp1 * p2).scale(c2[3])
    pp1sq = pp1 * pp1
    third = (pp1sq * pp1).scale(c3[0]) + (pp1sq * p1sq).scale(c3[1]) \
        + (pp1 * p1sq * p1sq).scale(c3[2]) + (p1sq * p1sq * p1sq).scale(c3[3])
    out[4] = Ainv * first + Ainv2 * second + Ainv2 * Ainv * third
    return out


def genus_pieces(spec: TruncationSpec, g_max: int, m3=None, m4=None) -> GenusTable:
    """M_(0)..M_(g_max) from the closed forms, exact through t-degree D."""
    if spec.t_degree < 1:
        raise TruncationTooSmall("genus pieces need t_degree >= 1")
    work = _genus_work(spec, g_max, m3, m4)
    return GenusTable(entries={g: s.embed(spec) for g, s in work.items()}, spec=spec)


def m2_from_i(sd: SaddleData) -> Series:
    """5/24 I2^2/(1-I1)^3 + 1/8 I3/(1-I1)^2."""
    inv = invert_unit(1 - _i(sd, 1))
    inv2 = inv * inv
    i2 = _i(sd, 2)
    return (i2 * i2 * inv2 * inv).scale(mpq(5, 24)) + (_i(sd, 3) * inv2).scale(mpq(1, 8))


def genus_recurrence(table: dict, g: int, n: int) -> tuple[Series, Series]:
    """(n+1) dM_g/dt_n against sum_(a+b=g) M_a' dM_b/dt_(n-1) + d0 d_(n-1) M_(g-1)."""
    d0, dn, dm = T(0), T(n), T(n - 1)
    lhs = table[g].derive(dn).scale(n + 1)
    rhs = Series.zero(lhs.spec)
    for a in range(g + 1):
        rhs = rhs + table[a].derive(d0) * table[g - a].derive(dm)
    if g >= 1:
        rhs = rhs + table[g - 1].derive(dm).derive(d0)
    return lhs, rhs


def verify_genus_against_logz(spec: TruncationSpec, g_max: int,
                              g: GravitySeries | None = None,
                              table: GenusTable | None = None,
                              sd: SaddleData | None = None) -> list[VerificationReport]:
    """One report per genus slice plus the graded recurrences and the I-form of M_(2)."""
    g = g or z1d(spec)
    table = table or genus_pieces(spec, g_max)
    D = spec.t_degree
    win = Window(t_degree=D)
    out = []
    for genus in range(g_max + 1):
        t0 = timer()
        sl = g.m.slice(LAM2, genus - 1)
        out.append(compare(f"genus.slice.g{genus}",
                           f"lam^(2g-2) slice of log Z equals M_({genus})",
                           sl, table[genus], win, D, started=t0))
    # graded recurrences
    t0 = timer()
    safe = safe_degree(spec, [2])
    reps = []
    for genus in range(g_max + 1):
        for n in range(1, spec.n_max + 1):
            lhs, rhs = genus_recurrence(table.entries, genus, n)
            reps.append(compare(f"g{genus}n{n}", "", lhs, rhs, Window(t_degree=safe), safe))
    rep = combine("genus.recurrence", "genus-graded Burgers recurrence", reps)
    rep.elapsed_ms = int((timer() - t0) * 1000)
    out.append(rep)
    # rec:M0 and the genus-1 auxiliary relations
    t0 = timer()
    sd = sd or solve_saddle(spec)
    M0 = table[0]
    reps = []
    s1 = safe_degree(spec, [1])
    for n in range(1, spec.n_max + 2):
        if n - 1 > spec.n_max:
            break
        reps.append(compare(f"x^{n}", "", sd.powers[n], M0.derive(T(n - 1)),
                            Window(t_degree=s1), s1))
    if g_max >= 1:
        M1 = table[1]
        s2 = safe_degree(spec, [2])
        for n in range(1, spec.n_max + 1):
            lhs = M1.derive(T(n))
            half = M0.derive(T(n - 1)).derive(T(0)).scale(mpq(1, 2))
            mid = (M0.derive(T(0)) * M1.derive(T(n - 1))).scale(mpq(1, n)) + half.scale(mpq(1, n))
            right = M1.derive(T(0)) * M0.derive(T(n - 1)) + half
            reps.append(compare(f"g1a{n}", "", lhs, mid, Window(t_degree=s2), s2))
            reps.append(compare(f"g1b{n}", "", lhs, right, Window(t_degree=s2), s2))
        A = M0.derive(T(0), 2)
        reps.append(compare("unit", "", A * (1 - _i(sd, 1)), Series.one(spec),
                            Window(t_degree=s2), s2))
    rep = combine("genus.low_order", "genus-0 and genus-1 relations", reps)
    rep.elapsed_ms = int((timer() - t0) * 1000)
    out.append(rep)
    if g_max >= 2:
        t0 = timer()
        out.append(compare("genus.m2_iform", "M_(2) in I-coordinates",
                           m2_from_i(sd), table[2], win, D, started=t0))
    return out


def z_saddle_form(spec: TruncationSpec, printed: bool = False) -> Series:
    """Z rebuilt around the saddle point.

    Default: the Gaussian-moment weights (N-1)!! (lam^2/(1-I1))^(N/2) / lam^(2 sum n)
    with N = sum (k+1) n_k.  ``printed=True`` uses (N+1)!! and
    (1-I1)^(-(N - 2 sum n)/2) instead.
    """
    N = spec.n_max
    sd = solve_saddle(spec)
    S = action_at_saddle(sd)
    lead = exp_adic(S.mul_monomial({LAM2: -1}))
    one_minus = 1 - _i(sd, 1)
    # DP over k: states (sum n, sum (k+1) n) -> partial sum of products
    states = {(0, 0): Series.one(spec)}
    for k in range(2, N + 1):
        ik = _i(sd, k)
        if ik.is_zero():
            continue
        new: dict = {}
        for (s, big), val in states.items():
            term = val
            n = 0
            while s + n <= spec.t_degree and not term.is_zero():
                key = (s + n, big + (k + 1) * n)
                new[key] = new[key] + term if key in new else term
                n += 1
                term = (term * ik).scale(mpq(1, n * factorial(k + 1)))
        states = new
    total = Series.zero(spec)
    pow_cache: dict = {}
    for (s, big), val in sorted(states.items()):
        if big % 2:
            continue
        lam = (big - 2 * s) // 2
        if printed:
            df, expo = dfact(big + 1), mpq(-lam, 1)
        else:
            df, expo = dfact(big - 1), mpq(-big, 2)
        if expo not in pow_cache:
            pow_cache[expo] = power(one_minus, expo)
        total = total + (val * pow_cache[expo]).mul_monomial({LAM2: lam}, df)
    return lead * power(one_minus, mpq(-1, 2)) * total


def verify_z_saddle_form(spec: TruncationSpec, printed: bool = False,
                         g: GravitySeries | None = None) -> VerificationReport:
    t0 = timer()
    g = g or z1d(spec)
    safe = safe_degree(spec, [])
    ident = "genus.saddle_form.printed" if printed else "genus.saddle_form"
    return compare(ident, "Z expanded around the saddle point", z_saddle_form(spec, printed),
                   g.z, Window(t_degree=safe), safe, started=t0)
