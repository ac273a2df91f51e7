"""Moyal-Weyl star products, star exponentials and the two-matrix partition function.

hbar = kappa * lam2 stands in for i theta / 2, so everything stays rational.
A star spec should satisfy t_degree >= weight: star products preserve w'
and are then exact on every retained monomial.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import factorial

from gmpy2 import mpq

from .errors import NotAugmentationZero, NotUnit, TruncationTooSmall
from .gravity1d import dfact, z1d
from .report import VerificationReport, Window, combine, compare, scalar_report, timer
from .saddle import GenusTable
from .series import (KAPPA, KMN, LAM2, Series, T, TT, TruncationSpec, Var, exp_adic, power)

# displayed Taylor coefficients of the Gaussian two-matrix partition function:
# (t0 exponent, tt0 exponent, kappa exponent, lam2 exponent) -> coefficient
TAYLOR_TABLE = {
    (0, 0, 0, 0): mpq(1), (0, 2, 0, -1): mpq(1, 2), (2, 0, 0, -1): mpq(1, 2),
    (2, 2, 0, -2): mpq(1, 4),
    (1, 1, 1, -1): mpq(1), (1, 3, 1, -2): mpq(1, 2), (3, 1, 1, -2): mpq(1, 2),
    (3, 3, 1, -3): mpq(1, 4),
    (0, 0, 2, 0): mpq(1, 2), (0, 2, 2, -1): mpq(3, 4), (2, 0, 2, -1): mpq(3, 4),
    (2, 2, 2, -2): mpq(9, 8),
    (1, 1, 3, -1): mpq(3, 2), (1, 3, 3, -2): mpq(5, 4), (3, 1, 3, -2): mpq(5, 4),
    (3, 3, 3, -3): mpq(25, 24),
}

# bracket words of the printed BCH series: (coefficient, word); a word
# "XYX" means [X,[Y,X]] read left to right as nested brackets
BCH_WORDS = (
    (mpq(1), "X"), (mpq(1), "Y"), (mpq(1, 2), "XY"),
    (mpq(1, 12), "XXY"), (mpq(1, 12), "YYX"),
    (mpq(-1, 24), "YXXY"),
    (mpq(-1, 720), "YYYYX"), (mpq(-1, 720), "XXXXY"),
    (mpq(1, 360), "XYYYX"), (mpq(1, 360), "YXXXY"),
    (mpq(1, 120), "YXYXY"), (mpq(1, 120), "XYXYX"),
)


@dataclass(frozen=True)
class StarContext:
    """Deformation data: one kappa on (t0, tt0) or a table of kappa_(m,n)."""

    pairs: tuple = ()

    @classmethod
    def single(cls) -> "StarContext":
        return cls(pairs=())

    @classmethod
    def general(cls, pairs) -> "StarContext":
        pairs = tuple(sorted({(int(m), int(n)) for m, n in pairs}))
        if not pairs:
            raise ValueError("general mode needs at least one (m, n) pair")
        return cls(pairs=pairs)

    @property
    def mode(self) -> str:
        return "general" if self.pairs else "single"

    def triples(self) -> list[tuple[Var, Var, Var]]:
        """(left variable, right variable, coupling) for each bidifferential pair."""
        if not self.pairs:
            return [(T(0), TT(0), KAPPA)]
        return [(T(m), TT(n), KMN(m, n)) for m, n in self.pairs]

    def spec(self, weight: int, n_max: int, kappa_degree: int, aux=()) -> TruncationSpec:
        return TruncationSpec(t_degree=weight, n_max=n_max, kappa_degree=kappa_degree,
                              tilde=True, kappa=not self.pairs, kappa_pairs=self.pairs,
                              weight=weight, aux=aux)


def _derivs(s: Series, cache: dict, word: tuple) -> Series:
    """Cached mixed partial; ``word`` is a sorted tuple of (Var, count)."""
    got = cache.get(word)
    if got is None:
        (v, n), rest = word[-1], word[:-1]
        got = _derivs(s, cache, rest).derive(v, n)
        cache[word] = got
    return got


def _word(counts: dict) -> tuple:
    return tuple(sorted(((v, n) for v, n in counts.items() if n), key=lambda p: p[0].order))


def _orders(npairs: int, top: int):
    """All (a_1, b_1, ..., a_p, b_p) with total at most ``top``."""
    def rec(i: int, left: int):
        if i == 2 * npairs:
            yield ()
            return
        for a in range(left + 1):
            for rest in rec(i + 1, left - a):
                yield (a,) + rest
    yield from rec(0, top)


def _star(f: Series, g: Series, ctx: StarContext, parity: int | None = None) -> Series:
    f._check(g)
    spec = f.spec
    triples = [t for t in ctx.triples() if spec.has(t[2])]
    if not triples or f.is_zero() or g.is_zero():
        return f * g if parity in (None, 0) else Series.zero(spec)
    K = spec.kappa_degree
    fc: dict = {(): f}
    gc: dict = {(): g}
    out: dict = {}
    for orders in _orders(len(triples), K):
        k = sum(orders)
        if parity is not None and k % 2 != parity:
            continue
        fd: dict = {}
        gd: dict = {}
        exps: dict = {LAM2: k} if k else {}
        coeff = mpq(1)
        for (u, v, kv), a, b in zip(triples, orders[0::2], orders[1::2]):
            if a + b == 0:
                continue
            fd[u] = fd.get(u, 0) + a
            fd[v] = fd.get(v, 0) + b
            gd[v] = gd.get(v, 0) + a
            gd[u] = gd.get(u, 0) + b
            exps[kv] = exps.get(kv, 0) + a + b
            coeff *= mpq((-1) ** b, factorial(a) * factorial(b))
        F = _derivs(f, fc, _word(fd))
        if F.is_zero():
            continue
        G = _derivs(g, gc, _word(gd))
        if G.is_zero():
            continue
        term = F.mul_shifted(G, exps, coeff)
        for key, c in term.terms.items():
            prev = out.get(key)
            out[key] = c if prev is None else prev + c
    return Series(spec, {key: c for key, c in out.items() if c})


def star(f: Series, g: Series, ctx: StarContext) -> Series:
    """f star g, truncated at the spec's kappa degree."""
    return _star(f, g, ctx)


def commutator_star(f: Series, g: Series, ctx: StarContext) -> Series:
    """[f, g]: twice the odd-order part of the star product."""
    return _star(f, g, ctx, parity=1).scale(2)


def poisson(f: Series, g: Series, u: Var = T(0), v: Var = TT(0)) -> Series:
    return f.derive(u) * g.derive(v) - f.derive(v) * g.derive(u)


def _check_positive(x: Series) -> None:
    if any(w <= 0 for w in x.components()):
        raise NotAugmentationZero("star exponential needs positive w'-valuation")


def exp_star(x: Series, ctx: StarContext) -> Series:
    """sum x^(*n)/n!."""
    _check_positive(x)
    out = Series.one(x.spec)
    term = out
    n = 0
    while True:
        n += 1
        term = star(x, term, ctx).scale(mpq(1, n))
        if term.is_zero():
            return out
        out = out + term


def log_star(z: Series, ctx: StarContext) -> Series:
    """Inverse of exp_star: sum (-1)^(n+1) (z-1)^(*n)/n."""
    comps = z.components()
    if any(w < 0 for w in comps) or comps.get(0) != Series.one(z.spec):
        raise NotUnit("log_star needs constant term exactly 1")
    y = z - 1
    out = Series.zero(z.spec)
    pw = Series.one(z.spec)
    n = 0
    while True:
        n += 1
        pw = star(y, pw, ctx)
        if pw.is_zero():
            return out
        out = out + pw.scale(mpq((-1) ** (n + 1), n))


def ad_series(m: Series, y: Series, ctx: StarContext, weights) -> Series:
    """sum_k weights(k) ad_m^k (y), stopping once a bracket vanishes."""
    out = y.scale(weights(0))
    cur = y
    k = 0
    while True:
        k += 1
        cur = commutator_star(m, cur, ctx)
        if cur.is_zero():
            return out
        out = out + cur.scale(weights(k))


# two-matrix partition function ---------------------------------------------

def one_dim_spec(spec: TruncationSpec) -> TruncationSpec:
    """Commuting spec holding one copy of the couplings, deep enough for spec."""
    deg = spec.weight if spec.weight is not None else spec.t_degree + spec.kappa_degree
    return TruncationSpec(t_degree=deg, n_max=spec.n_max)


def lift(s: Series, spec: TruncationSpec, tilde: bool = False) -> Series:
    """Embed a one-copy series into a star spec, optionally as the tilde copy."""
    if not tilde:
        return s.embed(spec)

    def swap(exps):
        return {(TT(v.i) if v.kind == "t" else v): e for v, e in exps.items()}, 1
    return s.map_monomials(spec, swap)


@dataclass
class TwoMatrix:
    z: Series          # Z^TM
    m: Series          # M (t copy) lifted
    mt: Series         # M (tilde copy) lifted
    z1: Series         # Z (t copy) lifted
    zt: Series         # Z (tilde copy) lifted
    spec: TruncationSpec
    ctx: StarContext


def two_matrix(spec: TruncationSpec, ctx: StarContext) -> TwoMatrix:
    if not spec.tilde:
        raise ValueError("two-matrix spec needs tilde couplings")
    if spec.n_max < 0:
        raise TruncationTooSmall("two-matrix spec needs couplings")
    g = z1d(one_dim_spec(spec))
    z1, zt = lift(g.z, spec), lift(g.z, spec, True)
    return TwoMatrix(z=star(z1, zt, ctx), m=lift(g.m, spec), mt=lift(g.m, spec, True),
                     z1=z1, zt=zt, spec=spec, ctx=ctx)


def z_tm(spec: TruncationSpec, ctx: StarContext) -> Series:
    """Z(t) star Z(tt)."""
    return two_matrix(spec, ctx).z


def bch_series(x: Series, y: Series, ctx: StarContext) -> Series:
    """The printed BCH combination of x and y, through five-fold brackets."""
    cache: dict[str, Series] = {"X": x, "Y": y}

    def word(w: str) -> Series:
        got = cache.get(w)
        if got is None:
            got = commutator_star(cache[w[0]], word(w[1:]), ctx)
            cache[w] = got
        return got

    out = Series.zero(x.spec)
    for c, w in BCH_WORDS:
        out = out + word(w).scale(c)
    return out


def taylor_spec() -> TruncationSpec:
    """The (t0, tt0, kappa) box: exponents up to 3 each fit weight 12."""
    return StarContext.single().spec(weight=12, n_max=0, kappa_degree=3)


def taylor_window() -> Window:
    return Window(kappa_degree=3, var_max=((T(0), 3), (TT(0), 3)))


def gaussian_tm_closed(spec: TruncationSpec) -> Series:
    """(1-k^2)^(-1/2) exp((t0^2 + tt0^2 + 2k t0 tt0) / (2 lam2 (1-k^2)))."""
    one = Series.one(spec)
    k2 = Series.monomial(spec, {KAPPA: 2})
    inv = power(one - k2, -1)
    q = Series.monomial(spec, {T(0): 2, LAM2: -1}, mpq(1, 2)) \
        + Series.monomial(spec, {TT(0): 2, LAM2: -1}, mpq(1, 2)) \
        + Series.monomial(spec, {T(0): 1, TT(0): 1, KAPPA: 1, LAM2: -1})
    return power(one - k2, mpq(-1, 2)) * exp_adic(q * inv)


def verify_taylor_table(spec: TruncationSpec | None = None) -> VerificationReport:
    t0 = timer()
    spec = spec or taylor_spec()
    z = z_tm(spec, StarContext.single())
    reps = []
    for (a, b, k, l), want in sorted(TAYLOR_TABLE.items()):
        exps = {T(0): a, TT(0): b, KAPPA: k, LAM2: l}
        got = z.coefficient(exps)
        reps.append(scalar_report(f"{a}{b}{k}", "", got == want, spec, str(want), str(got),
                                  monomial=f"t0^{a} tt0^{b} kappa^{k} lam2^{l}"))
    reps.append(compare("closed", "", z, gaussian_tm_closed(spec), taylor_window(), None))
    rep = combine("star.taylor_table", "Taylor table of the Gaussian two-matrix model", reps)
    rep.elapsed_ms = int((timer() - t0) * 1000)
    return rep


def verify_normalization(spec: TruncationSpec, ctx: StarContext,
                         tm: TwoMatrix | None = None) -> VerificationReport:
    """Z^TM at zero couplings against sum (2n-1)!!/(2n)!! kappa^(2n)."""
    t0 = timer()
    tm = tm or two_matrix(spec, ctx)
    zero = tm.z.at_zero([v for v in spec.variables() if v.kind in ("t", "tt")])
    want = Series.zero(spec)
    for n in range(spec.kappa_degree // 2 + 1):
        want = want + Series.monomial(spec, {KAPPA: 2 * n}, mpq(dfact(2 * n - 1), dfact(2 * n)))
    win = Window(kappa_degree=spec.kappa_degree)
    k2 = Series.monomial(spec, {KAPPA: 2})
    reps = [compare("series", "", zero, want, win, None),
            compare("square", "", zero * zero * (1 - k2), Series.one(spec), win, None)]
    rep = combine("star.normalization", "zero-coupling value 1/sqrt(1-kappa^2)", reps)
    rep.elapsed_ms = int((timer() - t0) * 1000)
    return rep


def verify_reduction(spec: TruncationSpec, ctx: StarContext,
                     tm: TwoMatrix | None = None) -> VerificationReport:
    """Z^TM at tt = 0 equals Z with t1 shifted by kappa^2."""
    t0 = timer()
    if spec.n_max < 1:
        raise TruncationTooSmall("reduction needs t1")
    from .series import substitute
    tm = tm or two_matrix(spec, ctx)
    red = tm.z.at_zero([TT(n) for n in range(spec.n_max + 1)])
    shifted = substitute(tm.z1, T(1), Series.variable(spec, T(1)) + Series.monomial(spec, {KAPPA: 2}))
    return compare("star.reduction", "tt = 0 reduces to the shift t1 -> t1 + kappa^2",
                   red, shifted, Window(weight=spec.weight), spec.weight, started=t0)


def gaussian_brackets(spec: TruncationSpec, ctx: StarContext) -> dict[str, Series]:
    m = Series.monomial(spec, {T(0): 2, LAM2: -1}, mpq(1, 2))
    mt = Series.monomial(spec, {TT(0): 2, LAM2: -1}, mpq(1, 2))
    xy = commutator_star(m, mt, ctx)
    xxy = commutator_star(m, xy, ctx)
    yyx = commutator_star(mt, commutator_star(mt, m, ctx), ctx)
    return {"XY": xy, "XXY": xxy, "YYX": yyx, "YXXY": commutator_star(mt, xxy, ctx),
            "M": m, "MT": mt}


def verify_bch(spec: TruncationSpec, ctx: StarContext, gaussian: bool = True,
               tm: TwoMatrix | None = None) -> VerificationReport:
    """Exp* of the printed BCH series reproduces Z^TM through kappa^3."""
    t0 = timer()
    if spec.kappa_degree < 3:
        raise TruncationTooSmall("BCH check needs kappa_degree >= 3")
    win = Window(kappa_degree=3)
    reps = []
    if gaussian:
        b = gaussian_brackets(spec, ctx)

        def mono(c, **e):
            exps = {{"t0": T(0), "tt0": TT(0), "k": KAPPA}[n]: v for n, v in e.items()}
            exps[LAM2] = -1
            return Series.monomial(spec, exps, c)

        expected = {"XY": mono(2, t0=1, tt0=1, k=1), "XXY": mono(4, t0=2, k=2),
                    "YYX": mono(4, tt0=2, k=2), "YXXY": mono(-16, t0=1, tt0=1, k=3)}
        for name, want in expected.items():
            reps.append(compare(name, "", b[name], want, win, None))
        x, y = b["M"], b["MT"]
        z = star(exp_adic(x), exp_adic(y), ctx)
        ident = "bch.gaussian"
    else:
        tm = tm or two_matrix(spec, ctx)
        x, y, z = tm.m, tm.mt, tm.z
        ident = "bch.general"
    mtm = bch_series(x, y, ctx)
    reps.append(compare("exp", "", exp_star(mtm, ctx), z, win, None))
    rep = combine(ident, "Exp* of the BCH series equals Z^TM through kappa^3", reps)
    rep.elapsed_ms = int((timer() - t0) * 1000)
    return rep


def genus_split_tm(m_tm: Series) -> GenusTable:
    """lam2-graded slices of a two-matrix free energy."""
    exps = m_tm.exponents(LAM2)
    top = max(exps) + 1 if exps else 0
    return GenusTable(entries={g: m_tm.slice(LAM2, g - 1) for g in range(top + 1)},
                      spec=m_tm.spec)


def poisson_genus0(m0: Series, mt0: Series) -> Series:
    """Genus-zero two-matrix free energy through kappa^3 from Poisson brackets."""
    spec = m0.spec
    k = {i: Series.monomial(spec, {KAPPA: i}) for i in (1, 2, 3)}
    xy = poisson(m0, mt0)
    return m0 + mt0 + k[1] * xy \
        + (k[2] * (poisson(m0, xy) + poisson(mt0, poisson(mt0, m0)))).scale(mpq(1, 3)) \
        - (k[3] * poisson(mt0, poisson(m0, xy))).scale(mpq(1, 3))


def verify_genus_split_tm(spec: TruncationSpec, ctx: StarContext,
                          tm: TwoMatrix | None = None,
                          m_tm: Series | None = None) -> VerificationReport:
    t0 = timer()
    tm = tm or two_matrix(spec, ctx)
    m_tm = m_tm if m_tm is not None else log_star(tm.z, ctx)
    table = genus_split_tm(m_tm)
    m0, mt0 = tm.m.slice(LAM2, -1), tm.mt.slice(LAM2, -1)
    win = Window(kappa_degree=min(3, spec.kappa_degree))
    reps = [compare("g0", "", table[0], poisson_genus0(m0, mt0), win, None)]
    k0 = Window(kappa_degree=0)
    reps.append(compare("k0", "", m_tm, tm.m + tm.mt, k0, None))
    rep = combine("star.genus_split", "genus-zero two-matrix free energy from Poisson brackets",
                  reps)
    rep.elapsed_ms = int((timer() - t0) * 1000)
    return rep


def verify_general_star_hierarchy(m: int, n: int, spec: TruncationSpec, ctx: StarContext,
                                  z: Series | None = None) -> VerificationReport:
    """(m+1)!(n+1)!/lam^(2(m+n)) lam^-2 dZ/dk_(m,n) = d_t0^(m+1) d_tt0^(n+1) Z."""
    t0 = timer()
    if (m, n) not in ctx.pairs:
        raise ValueError(f"pair {(m, n)} not in the star context")
    W = spec.weight
    shift = m + n + 2
    if W is None or W - shift < 0 or spec.kappa_degree < 1:
        raise TruncationTooSmall("hierarchy check needs weight >= m+n+2 and kappa")
    z = z if z is not None else z_tm(spec, ctx)
    lhs = z.derive(KMN(m, n)).mul_monomial({LAM2: -(m + n) - 1},
                                          factorial(m + 1) * factorial(n + 1))
    rhs = z.derive(T(0), m + 1).derive(TT(0), n + 1)
    win = Window(weight=W - shift, kappa_degree=spec.kappa_degree - 1)
    return compare(f"star.general_hierarchy.{m}{n}",
                   "kappa_(m,n) flow equals mixed t0/tt0 derivatives", lhs, rhs, win,
                   W - shift, started=t0)


def associativity_residual(f: Series, g: Series, h: Series, ctx: StarContext) -> Series:
    return star(star(f, g, ctx), h, ctx) - star(f, star(g, h, ctx), ctx)

