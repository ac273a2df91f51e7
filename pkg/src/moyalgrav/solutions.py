"""Closed-form solutions of the heat, Burgers and STO equations and the (G'/G) algebra."""

from __future__ import annotations

from dataclasses import dataclass
from math import factorial

import sympy as sp
from gmpy2 import mpq

from .errors import AnsatzError, TruncationTooSmall
from .gravity1d import dfact, z1d
from .report import VerificationReport, Window, combine, compare, scalar_report, timer
from .series import (LAM2, TAU, X, Q, Series, T, TruncationSpec, exp_adic, log_adic, power)


def bivariate_spec(x_max: int, tau_max: int) -> TruncationSpec:
    if x_max < 0 or tau_max < 0:
        raise ValueError("degree bounds must be non-negative")
    return TruncationSpec(t_degree=0, aux=(("x", x_max), ("tau", tau_max)))


def _bounds(spec: TruncationSpec) -> tuple[int, int]:
    return spec.aux_bound("x") or 0, spec.aux_bound("tau") or 0


def _box(spec: TruncationSpec, dx: int, dt: int) -> Window:
    xm, tm = _bounds(spec)
    if xm - dx < 0 or tm - dt < 0:
        raise TruncationTooSmall(f"window x <= {xm - dx}, tau <= {tm - dt} is empty")
    return Window(var_max=((X, xm - dx), (TAU, tm - dt)))


def heat_kernel_theta(spec: TruncationSpec) -> Series:
    """(1 - 2 tau/mu)^(-1/2) exp(x^2 / (2 mu) / (1 - 2 tau/mu)), mu = lam2."""
    one = Series.one(spec)
    d = one - Series.monomial(spec, {TAU: 1, LAM2: -1}, 2)
    q = Series.monomial(spec, {X: 2, LAM2: -1}, mpq(1, 2)) * power(d, -1)
    return power(d, mpq(-1, 2)) * exp_adic(q)


def sto_theta(spec: TruncationSpec) -> Series:
    """sum_(m+3n even) (m+3n-1)!!/(m! n!) x^m tau^n lam^-(m+3n)."""
    xm, tm = _bounds(spec)
    terms = []
    for m in range(xm + 1):
        for n in range(tm + 1):
            big = m + 3 * n
            if big % 2:
                continue
            terms.append(({X: m, TAU: n, LAM2: -big // 2},
                          mpq(dfact(big - 1), factorial(m) * factorial(n))))
    return Series.from_terms(spec, terms)


def cole_hopf(theta: Series) -> Series:
    """u = d/dx log theta."""
    return log_adic(theta).derive(X)


def heat_residual(theta: Series) -> Series:
    return theta.derive(TAU) - theta.derive(X, 2)


def verify_heat_equation(theta: Series) -> VerificationReport:
    t0 = timer()
    win = _box(theta.spec, 2, 1)
    return compare("pde.heat", "heat equation for theta", heat_residual(theta),
                   Series.zero(theta.spec), win, None, started=t0)


def verify_third_order(theta: Series) -> VerificationReport:
    t0 = timer()
    win = _box(theta.spec, 3, 1)
    return compare("pde.sto_linear", "d theta/d tau = d^3 theta/dx^3", theta.derive(TAU),
                   theta.derive(X, 3), win, None, started=t0)


def burgers_residual(u: Series) -> Series:
    ux = u.derive(X)
    return u.derive(TAU) - ux.derive(X) - (u * ux).scale(2)


def sto_residual(u: Series) -> Series:
    ux = u.derive(X)
    return u.derive(TAU) - ux.derive(X, 2) - (u * ux).derive(X).scale(3) \
        - (u * u * ux).scale(3)


def verify_cole_hopf(theta: Series, kind: str = "burgers") -> VerificationReport:
    """Burgers (kind='burgers') or STO (kind='sto') residual of u = (log theta)_x."""
    t0 = timer()
    u = cole_hopf(theta)
    if kind == "burgers":
        res, win = burgers_residual(u), _box(theta.spec, 3, 1)
    elif kind == "sto":
        res, win = sto_residual(u), _box(theta.spec, 4, 1)
    else:
        raise ValueError(f"unknown equation {kind!r}")
    return compare(f"pde.cole_hopf.{kind}", f"Cole-Hopf image solves {kind}", res,
                   Series.zero(theta.spec), win, None, started=t0)


def gaussian_t0_t1(spec: TruncationSpec) -> Series:
    """exp(t0^2 / (2 lam2 (1 - t1))) (1 - t1)^(-1/2) in a commuting t-spec."""
    one = Series.one(spec)
    d = one - Series.variable(spec, T(1))
    q = Series.monomial(spec, {T(0): 2, LAM2: -1}, mpq(1, 2)) * power(d, -1)
    return exp_adic(q) * power(d, mpq(-1, 2))


def heat_to_z(theta: Series, spec: TruncationSpec) -> Series:
    """x -> t0, tau -> lam2 t1/2."""
    def fn(e):
        b = e.get(TAU, 0)
        return {T(0): e.get(X, 0), T(1): b, LAM2: e.get(LAM2, 0) + b}, mpq(1, 2 ** b)
    return theta.map_monomials(spec, fn)


def sto_to_z(theta: Series, spec: TruncationSpec) -> Series:
    """x -> t0, tau -> lam2^2 t2/3!."""
    def fn(e):
        n = e.get(TAU, 0)
        return {T(0): e.get(X, 0), T(2): n, LAM2: e.get(LAM2, 0) + 2 * n}, mpq(1, 6 ** n)
    return theta.map_monomials(spec, fn)


def verify_heat_mapping(theta: Series, t_degree: int) -> VerificationReport:
    """The heat-kernel theta equals Z(t0, t1) under the time substitution."""
    t0 = timer()
    xm, tm = _bounds(theta.spec)
    spec = TruncationSpec(t_degree=t_degree, n_max=1)
    z = z1d(spec).z
    win = Window(t_degree=t_degree, var_max=((T(0), xm), (T(1), tm)))
    reps = [compare("z1d", "", heat_to_z(theta, spec), z, win, t_degree),
            compare("closed", "", gaussian_t0_t1(spec), z, win, t_degree)]
    rep = combine("pde.heat_mapping", "heat-kernel theta maps onto Z(t0, t1)", reps)
    rep.elapsed_ms = int((timer() - t0) * 1000)
    return rep


def verify_sto_mapping(theta: Series, t_degree: int) -> VerificationReport:
    t0 = timer()
    xm, tm = _bounds(theta.spec)
    spec = TruncationSpec(t_degree=t_degree, n_max=2)
    z = z1d(spec).z.at_zero([T(1)])
    win = Window(t_degree=t_degree, var_max=((T(0), xm), (T(2), tm)))
    return compare("pde.sto_mapping", "STO theta maps onto Z(t0, t2)", sto_to_z(theta, spec),
                   z, win, t_degree, started=t0)


# (G'/G) algebra ------------------------------------------------------------

r, s, c, C, xi, lam2 = sp.symbols("r s c C xi lambda2")


class GGPolynomial:
    """Laurent polynomial in g = G'/G with sympy coefficients.

    With G'' + r G' + s G = 0 the xi-derivative acts as
    (g^n)' = -n g^(n+1) - r n g^n - s n g^(n-1).
    """

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: dict | None = None):
        out = {}
        for n, v in (coeffs or {}).items():
            v = sp.expand(v)
            if v != 0:
                out[int(n)] = v
        self.coeffs = out

    @classmethod
    def g(cls, n: int = 1) -> "GGPolynomial":
        return cls({n: 1})

    @classmethod
    def const(cls, v) -> "GGPolynomial":
        return cls({0: v})

    def __add__(self, other) -> "GGPolynomial":
        other = other if isinstance(other, GGPolynomial) else GGPolynomial.const(other)
        out = dict(self.coeffs)
        for n, v in other.coeffs.items():
            out[n] = out.get(n, 0) + v
        return GGPolynomial(out)

    __radd__ = __add__

    def __neg__(self) -> "GGPolynomial":
        return GGPolynomial({n: -v for n, v in self.coeffs.items()})

    def __sub__(self, other) -> "GGPolynomial":
        return self + (-other if isinstance(other, GGPolynomial) else -sp.sympify(other))

    def __mul__(self, other) -> "GGPolynomial":
        if not isinstance(other, GGPolynomial):
            return GGPolynomial({n: v * other for n, v in self.coeffs.items()})
        out: dict = {}
        for n, v in self.coeffs.items():
            for m, w in other.coeffs.items():
                out[n + m] = out.get(n + m, 0) + v * w
        return GGPolynomial(out)

    __rmul__ = __mul__

    def derivative(self) -> "GGPolynomial":
        out: dict = {}
        for n, v in self.coeffs.items():
            for k, f in ((n + 1, -n), (n, -r * n), (n - 1, -s * n)):
                out[k] = out.get(k, 0) + f * v
        return GGPolynomial(out)

    def subs(self, rel: dict) -> "GGPolynomial":
        return GGPolynomial({n: v.subs(rel) for n, v in self.coeffs.items()})

    def is_zero(self) -> bool:
        return not self.coeffs

    def __eq__(self, other) -> bool:
        return isinstance(other, GGPolynomial) and (self - other).is_zero()

    def __repr__(self) -> str:
        return " + ".join(f"({v})*g^{n}" for n, v in sorted(self.coeffs.items())) or "0"


def ansatz_symbols(n_min: int, n_max: int) -> dict[int, sp.Symbol]:
    return {n: sp.Symbol(f"a{n}" if n >= 0 else f"am{-n}") for n in range(n_min, n_max + 1)}


def burgers_integrated(u: GGPolynomial) -> GGPolynomial:
    """c u + u' + u^2 - C, the integrated travelling-wave Burgers equation."""
    return u * c + u.derivative() + u * u - C


@dataclass
class GGReduction:
    relations: dict
    residual: GGPolynomial


def gg_reduce_burgers(n_min: int = 0, n_max: int = 1) -> GGReduction:
    """Solve c u + u' + u^2 = C for u = sum_(n_min..n_max) a_n g^n.

    Degree balancing at the top (n_max + 1 = 2 n_max) forces n_max = 1.
    The top power fixes a_(n_max) != 0; the remaining equations are solved
    for c, C and the negative-index coefficients.  The first solution in
    sympy's canonical order is returned.
    """
    if n_max != 1:
        raise AnsatzError(f"highest power must be 1 by degree balancing, got {n_max}")
    if n_min > n_max:
        raise AnsatzError("n_min exceeds n_max")
    a = ansatz_symbols(n_min, n_max)
    u = GGPolynomial({n: a[n] for n in a})
    res = burgers_integrated(u)
    # the top power fixes the leading coefficient; solve the rest after it
    lead = [v for v in sp.solve(res.coeffs.get(n_max + 1, 0), a[n_max]) if v != 0]
    if not lead:
        raise AnsatzError("no solution with a nonvanishing leading coefficient")
    sols = []
    for v in lead:
        rest = res.subs({a[n_max]: v})
        unknowns = [c, C] + [a[n] for n in a if n < 0]
        for so in sp.solve(list(rest.coeffs.values()), unknowns, dict=True):
            sols.append({a[n_max]: v, **so})
    if not sols:
        raise AnsatzError("ansatz equations have no solution")
    sols.sort(key=lambda d: sp.default_sort_key(tuple(sorted(d.items(), key=str))))
    rel = {k: sp.expand(v) for k, v in sols[0].items()}
    return GGReduction(relations=rel, residual=res.subs(rel))


# the relations as printed, for comparison
GG_PRINTED = {"a1": sp.Integer(1), "c": s + r - 2 * sp.Symbol("a0"),
              "C": (s + r - sp.Symbol("a0")) * sp.Symbol("a0")}


def verify_gg_reduction(expected: dict | None = None) -> VerificationReport:
    """Compare the solved relations with ``expected`` (default: the printed triple)."""
    t0 = timer()
    expected = GG_PRINTED if expected is None else expected
    red = gg_reduce_burgers()
    got = {str(k): v for k, v in red.relations.items()}
    reps = [scalar_report("residual", "", red.residual.is_zero(), None, "0", repr(red.residual))]
    for name in ("a1", "c", "C"):
        want = sp.sympify(expected[name])
        val = got.get(name, sp.Symbol(name))
        reps.append(scalar_report(name, "", sp.expand(val - want) == 0, None, str(want),
                                  str(val), monomial=name))
    rep = combine("gg.reduction", "(G'/G) reduction of the integrated Burgers equation", reps)
    rep.elapsed_ms = int((timer() - t0) * 1000)
    return rep


def obstruction_residual(sign: int = -1, a0=None) -> sp.Expr:
    """(G'' + a0 G' - G/lam2 - sign xi/lam2 G') / G for G'/G = xi/lam2 - a0."""
    a0 = sp.Symbol("a0") if a0 is None else a0
    g = xi / lam2 - a0
    gpp_over_g = sp.diff(g, xi) + g ** 2
    return sp.expand(gpp_over_g + a0 * g - 1 / lam2 - sign * xi / lam2 * g)


def gg_obstruction(sign: int = -1, a0=None) -> VerificationReport:
    """PASS iff G'' + a0 G' - G/lam2 = sign (xi/lam2) G' under the forced profile.

    ``sign=-1`` is the printed identity.
    """
    t0 = timer()
    res = obstruction_residual(sign, a0)
    rep = scalar_report("gg.obstruction", "forced profile leaves the constant-coefficient class",
                        res == 0, None, "0", str(res), monomial="G")
    rep.elapsed_ms = int((timer() - t0) * 1000)
    return rep


def constant_coefficient_residual(a0=None) -> sp.Expr:
    """(G'' + r G' + s G)/G under the forced profile, as a polynomial in xi."""
    a0 = sp.Symbol("a0") if a0 is None else a0
    g = xi / lam2 - a0
    return sp.expand(sp.diff(g, xi) + g ** 2 + r * g + s)


def classify_discriminant(rv, sv) -> str:
    """'Negative', 'Zero' or 'Positive' for r^2 - 4 s."""
    d = Q(rv) ** 2 - 4 * Q(sv)
    return "Negative" if d < 0 else ("Zero" if d == 0 else "Positive")


FAMILY = {"Negative": "trigonometric", "Zero": "linear", "Positive": "hyperbolic"}
