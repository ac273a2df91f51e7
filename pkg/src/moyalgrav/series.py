"""Sparse truncated multivariate power series over exact rationals.

Monomials are packed into a single Python integer made of 16-bit fields:

    field 0        weight w' = deg_T + deg_TT + 2 deg_kappa + aux degrees (biased)
    field 1        total T/TT degree
    field 2        total kappa degree
    field 3 + i    exponent of the i-th variable of the spec (lam2, zinv biased)

Multiplying two monomials is then ``ka + kb - bias`` and differentiating by
``v`` is ``key - step[v]``.  Every bound of a spec cuts out a monomial ideal, so
ring operations on truncated series are exact on the retained monomials.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, replace
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Iterator, Mapping, NamedTuple

from gmpy2 import mpq, mpz

from .errors import (
    NotAugmentationZero,
    NotInvertible,
    NotUnit,
    SpecMismatch,
    TruncationTooSmall,
)

FIELD = 16
MASK = (1 << FIELD) - 1
BIAS = 1 << (FIELD - 1)

KINDS = ("t", "tt", "kappa", "kmn", "lam2", "zinv", "l", "x", "tau", "xi")
AUX_KINDS = ("zinv", "l", "x", "tau", "xi")
SIGNED_KINDS = ("lam2", "zinv")
_WEIGHT = {"t": 1, "tt": 1, "kappa": 2, "kmn": 2, "lam2": 0,
           "zinv": 1, "l": 1, "x": 1, "tau": 1, "xi": 1, "z": 0}


class Var(NamedTuple):
    """A variable: ``kind`` plus up to two non-negative indices."""

    kind: str
    i: int = 0
    j: int = 0

    @property
    def order(self) -> tuple[int, int, int]:
        k = KINDS.index(self.kind) if self.kind in KINDS else len(KINDS)
        return (k, self.i, self.j)

    @property
    def weight(self) -> int:
        return _WEIGHT[self.kind]

    @property
    def is_coupling(self) -> bool:
        return self.kind in ("t", "tt", "kappa", "kmn")

    def __str__(self) -> str:
        if self.kind in ("t", "tt"):
            return f"{self.kind}{self.i}"
        if self.kind == "kmn":
            return f"k{self.i}_{self.j}"
        return self.kind

    def __repr__(self) -> str:
        return f"Var({self})"


def T(n: int) -> Var:
    return Var("t", n)


def TT(n: int) -> Var:
    return Var("tt", n)


def KMN(m: int, n: int) -> Var:
    return Var("kmn", m, n)


KAPPA = Var("kappa")
LAM2 = Var("lam2")
ZINV = Var("zinv")
L = Var("l")
X = Var("x")
TAU = Var("tau")
XI = Var("xi")
Z = Var("z")  # operator-only symbol; series carry z through ZINV

_VAR_RE = re.compile(r"^(?:(tt|t)(\d+)|k(\d+)_(\d+)|(kappa|lam2|zinv|l|x|tau|xi|z))$")


def parse_var(text: str) -> Var:
    m = _VAR_RE.match(text.strip())
    if not m:
        raise ValueError(f"unknown variable {text!r}")
    if m.group(1):
        return Var(m.group(1), int(m.group(2)))
    if m.group(3):
        return KMN(int(m.group(3)), int(m.group(4)))
    return Var(m.group(5))


def Q(value) -> mpq:
    """Coerce ints, Fractions, strings like '3/8' and mpq to mpq."""
    if isinstance(value, Fraction):
        return mpq(value.numerator, value.denominator)
    return mpq(value)


@dataclass(frozen=True)
class TruncationSpec:
    """Which variables exist and which monomials are kept.

    ``t_degree`` bounds the total T/TT degree, ``kappa_degree`` the total
    kappa degree and ``weight`` (optional) the w' grading.  ``aux`` holds
    ``(kind, bound)`` pairs for the auxiliary variables.
    """

    t_degree: int
    n_max: int = -1
    kappa_degree: int = 0
    tilde: bool = False
    kappa: bool = False
    kappa_pairs: tuple = ()
    weight: int | None = None
    aux: tuple = ()

    def __post_init__(self):
        if self.t_degree < 0 or self.kappa_degree < 0:
            raise ValueError("degree bounds must be non-negative")
        if self.n_max < -1:
            raise ValueError("n_max must be >= -1")
        if self.weight is not None and self.weight < 0:
            raise ValueError("weight bound must be non-negative")
        pairs = tuple(sorted({(int(m), int(n)) for m, n in self.kappa_pairs}))
        if any(m < 0 or n < 0 for m, n in pairs):
            raise ValueError("kappa pair indices must be non-negative")
        aux = dict(self.aux)
        for kind, bound in aux.items():
            if kind not in AUX_KINDS:
                raise ValueError(f"unknown auxiliary variable {kind!r}")
            if bound < 0:
                raise ValueError("auxiliary bounds must be non-negative")
        object.__setattr__(self, "kappa_pairs", pairs)
        object.__setattr__(
            self, "aux", tuple((k, int(aux[k])) for k in AUX_KINDS if k in aux))

    def variables(self) -> tuple[Var, ...]:
        out = [T(n) for n in range(self.n_max + 1)]
        if self.tilde:
            out += [TT(n) for n in range(self.n_max + 1)]
        if self.kappa:
            out.append(KAPPA)
        out += [KMN(m, n) for m, n in self.kappa_pairs]
        out.append(LAM2)
        out += [Var(kind) for kind, _ in self.aux]
        return tuple(out)

    def has(self, v: Var) -> bool:
        return v in _layout(self).index

    def aux_bound(self, kind: str) -> int | None:
        return dict(self.aux).get(kind)

    def replace(self, **changes) -> "TruncationSpec":
        return replace(self, **changes)

    def to_dict(self) -> dict:
        d = {"t_degree": self.t_degree, "n_max": self.n_max,
             "kappa_degree": self.kappa_degree, "tilde": self.tilde,
             "kappa": self.kappa,
             "kappa_pairs": [list(p) for p in self.kappa_pairs],
             "weight": self.weight,
             "aux": {k: b for k, b in self.aux}}
        return d

    @classmethod
    def from_dict(cls, d: Mapping) -> "TruncationSpec":
        return cls(t_degree=d["t_degree"], n_max=d["n_max"],
                   kappa_degree=d.get("kappa_degree", 0),
                   tilde=d.get("tilde", False), kappa=d.get("kappa", False),
                   kappa_pairs=tuple(tuple(p) for p in d.get("kappa_pairs", ())),
                   weight=d.get("weight"),
                   aux=tuple(d.get("aux", {}).items()))


class _Layout:
    """Field positions and bound checks for one spec."""

    def __init__(self, spec: TruncationSpec):
        self.spec = spec
        self.vars = spec.variables()
        self.index = {v: k for k, v in enumerate(self.vars)}
        self.shift = {v: FIELD * (3 + k) for k, v in enumerate(self.vars)}
        self.signed = {v for v in self.vars if v.kind in SIGNED_KINDS}
        bias = BIAS
        for v in self.signed:
            bias += BIAS << self.shift[v]
        self.bias = bias
        self.step = {}
        for v in self.vars:
            s = (1 << self.shift[v]) + v.weight
            if v.kind in ("t", "tt"):
                s += 1 << FIELD
            elif v.kind in ("kappa", "kmn"):
                s += 1 << (2 * FIELD)
            self.step[v] = s
        self.D = spec.t_degree
        self.K = spec.kappa_degree
        self.W = spec.weight
        self.has_t = spec.n_max >= 0
        self.has_k = spec.kappa or bool(spec.kappa_pairs)
        self.aux_checks = tuple(
            (self.shift[Var(kind)], bound + (BIAS if kind in SIGNED_KINDS else 0))
            for kind, bound in spec.aux)
        neg_weight = ZINV in self.index
        # grade used to prune products: weight if bounded, else T-degree
        self.grade_by_weight = self.W is not None or not self.has_t
        if self.grade_by_weight:
            self.G = self.weight_bound()
            implied = (not self.aux_checks and not neg_weight
                       and (not self.has_t or self.D >= self.G)
                       and (not self.has_k or 2 * self.K >= self.G))
        else:
            self.G = self.D
            implied = not self.has_k and not self.aux_checks
        self.need_check = not implied

    def max_weight(self) -> int:
        w = (self.D if self.has_t else 0) + (2 * self.K if self.has_k else 0)
        return w + sum(b for _, b in self.spec.aux)

    def weight_bound(self) -> int:
        m = self.max_weight()
        return m if self.W is None else min(m, self.W)

    def ok(self, k: int) -> bool:
        if ((k >> FIELD) & MASK) > self.D and self.has_t:
            return False
        if ((k >> (2 * FIELD)) & MASK) > self.K:
            return False
        if self.W is not None and (k & MASK) - BIAS > self.W:
            return False
        for s, b in self.aux_checks:
            if ((k >> s) & MASK) > b:
                return False
        return True

    def grade(self, k: int) -> int:
        if self.grade_by_weight:
            return (k & MASK) - BIAS
        return (k >> FIELD) & MASK

    def exp(self, k: int, v: Var) -> int:
        e = (k >> self.shift[v]) & MASK
        return e - BIAS if v in self.signed else e

    def encode(self, exps: Mapping[Var, int]) -> int:
        k = self.bias
        for v, e in exps.items():
            if e == 0:
                continue
            if v not in self.index:
                raise KeyError(f"variable {v} not in spec")
            if e < 0 and v not in self.signed:
                raise ValueError(f"negative exponent for {v}")
            k += e * self.step[v]
        return k

    def decode(self, k: int) -> tuple[tuple[Var, int], ...]:
        out = []
        for v in self.vars:
            e = self.exp(k, v)
            if e:
                out.append((v, e))
        return tuple(out)

    def dense(self, k: int) -> tuple[int, ...]:
        return tuple(self.exp(k, v) for v in self.vars)

    def weight(self, k: int) -> int:
        return (k & MASK) - BIAS

    def t_deg(self, k: int) -> int:
        return (k >> FIELD) & MASK

    def kappa_deg(self, k: int) -> int:
        return (k >> (2 * FIELD)) & MASK


@lru_cache(maxsize=None)
def _layout(spec: TruncationSpec) -> _Layout:
    return _Layout(spec)


def layout(spec: TruncationSpec) -> _Layout:
    return _layout(spec)


def _mul_terms(ta: dict, tb: dict, lay: _Layout, shift: int = 0) -> dict:
    """Truncated product of two term maps, times the monomial ``shift``."""
    if not ta or not tb:
        return {}
    grade = lay.grade
    sg = grade(lay.bias + shift)
    ga: dict[int, list] = {}
    for k, c in ta.items():
        ga.setdefault(grade(k), []).append((k, c))
    gb: dict[int, list] = {}
    for k, c in tb.items():
        gb.setdefault(grade(k), []).append((k, c))
    gbs = sorted(gb.items())
    G = lay.G
    base_bias = lay.bias - shift
    check = lay.need_check or shift != 0
    ok = lay.ok
    out: dict[int, mpq] = {}
    get = out.get
    for da, la in ga.items():
        rem = G - da - sg
        for db, lb in gbs:
            if db > rem:
                break
            for ka, ca in la:
                base = ka - base_bias
                for kb, cb in lb:
                    k = base + kb
                    if check and not ok(k):
                        continue
                    c = get(k)
                    out[k] = ca * cb if c is None else c + ca * cb
    return {k: c for k, c in out.items() if c}


class Series:
    """Immutable truncated power series; ``terms`` maps packed keys to mpq."""

    __slots__ = ("spec", "terms")

    def __init__(self, spec: TruncationSpec, terms: dict | None = None):
        self.spec = spec
        self.terms = terms if terms is not None else {}

    # construction -----------------------------------------------------
    @classmethod
    def zero(cls, spec: TruncationSpec) -> "Series":
        return cls(spec, {})

    @classmethod
    def constant(cls, spec: TruncationSpec, c=1) -> "Series":
        c = Q(c)
        return cls(spec, {_layout(spec).bias: c} if c else {})

    @classmethod
    def one(cls, spec: TruncationSpec) -> "Series":
        return cls.constant(spec, 1)

    @classmethod
    def monomial(cls, spec: TruncationSpec, exps: Mapping[Var, int] | None = None,
                 coeff=1) -> "Series":
        lay = _layout(spec)
        k = lay.encode(exps or {})
        c = Q(coeff)
        if not c or not lay.ok(k):
            return cls(spec, {})
        return cls(spec, {k: c})

    @classmethod
    def variable(cls, spec: TruncationSpec, v: Var) -> "Series":
        return cls.monomial(spec, {v: 1})

    @classmethod
    def from_terms(cls, spec: TruncationSpec,
                   terms: Iterable[tuple[Mapping[Var, int], object]]) -> "Series":
        lay = _layout(spec)
        out: dict[int, mpq] = {}
        for exps, c in terms:
            k = lay.encode(exps)
            if not lay.ok(k):
                continue
            out[k] = out.get(k, mpq(0)) + Q(c)
        return cls(spec, {k: c for k, c in out.items() if c})

    # inspection -------------------------------------------------------
    @property
    def layout(self) -> _Layout:
        return _layout(self.spec)

    def __len__(self) -> int:
        return len(self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    def coefficient(self, exps: Mapping[Var, int] | None = None) -> mpq:
        lay = self.layout
        try:
            k = lay.encode(exps or {})
        except KeyError:
            return mpq(0)
        return self.terms.get(k, mpq(0))

    def constant_term(self) -> mpq:
        return self.terms.get(self.layout.bias, mpq(0))

    def items(self) -> Iterator[tuple[dict[Var, int], mpq]]:
        lay = self.layout
        for k in self.sorted_keys():
            yield dict(lay.decode(k)), self.terms[k]

    def sorted_keys(self) -> list[int]:
        lay = self.layout
        return sorted(self.terms, key=lambda k: _canon(lay, k))

    def __eq__(self, other) -> bool:
        if not isinstance(other, Series):
            return NotImplemented
        return self.spec == other.spec and self.terms == other.terms

    def __hash__(self):
        raise TypeError("Series is not hashable")

    def __repr__(self) -> str:
        body = self.to_text().replace("\n", " + ") or "0"
        if len(body) > 200:
            body = body[:200] + " ..."
        return f"Series({body})"

    # ring operations --------------------------------------------------
    def _check(self, other: "Series") -> None:
        if self.spec != other.spec:
            raise SpecMismatch(f"{self.spec} vs {other.spec}")

    def _coerce(self, other) -> "Series":
        if isinstance(other, Series):
            self._check(other)
            return other
        return Series.constant(self.spec, other)

    def __add__(self, other) -> "Series":
        other = self._coerce(other)
        out = dict(self.terms)
        for k, c in other.terms.items():
            v = out.get(k)
            if v is None:
                out[k] = c
            else:
                v = v + c
                if v:
                    out[k] = v
                else:
                    del out[k]
        return Series(self.spec, out)

    __radd__ = __add__

    def __neg__(self) -> "Series":
        return Series(self.spec, {k: -c for k, c in self.terms.items()})

    def __sub__(self, other) -> "Series":
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> "Series":
        return self._coerce(other) - self

    def scale(self, c) -> "Series":
        c = Q(c)
        if not c:
            return Series(self.spec, {})
        return Series(self.spec, {k: v * c for k, v in self.terms.items()})

    def __mul__(self, other) -> "Series":
        if isinstance(other, Series):
            self._check(other)
            return Series(self.spec, _mul_terms(self.terms, other.terms, self.layout))
        return self.scale(other)

    def __rmul__(self, other) -> "Series":
        return self.scale(other)

    def __truediv__(self, other) -> "Series":
        if isinstance(other, Series):
            return self * invert_unit(other)
        return self.scale(1 / Q(other))

    def __pow__(self, n: int) -> "Series":
        if n < 0:
            return invert_unit(self) ** (-n)
        result = Series.one(self.spec)
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def mul_shifted(self, other: "Series", exps: Mapping[Var, int], coeff=1) -> "Series":
        """``coeff * monomial(exps) * self * other`` in one pass."""
        self._check(other)
        lay = self.layout
        shift = lay.encode(exps) - lay.bias
        terms = _mul_terms(self.terms, other.terms, lay, shift)
        out = Series(self.spec, terms)
        c = Q(coeff)
        return out if c == 1 else out.scale(c)

    def mul_monomial(self, exps: Mapping[Var, int], coeff=1) -> "Series":
        lay = self.layout
        shift = lay.encode(exps) - lay.bias
        c = Q(coeff)
        if not c:
            return Series(self.spec, {})
        out = {}
        ok = lay.ok
        for k, v in self.terms.items():
            nk = k + shift
            if ok(nk):
                out[nk] = v * c
        return Series(self.spec, out)

    def derive(self, v: Var, times: int = 1) -> "Series":
        """Formal partial derivative; zero if ``v`` is not in the spec."""
        lay = self.layout
        if times == 0:
            return self
        if v not in lay.index:
            return Series(self.spec, {})
        s = lay.shift[v]
        step = lay.step[v] * times
        signed = v in lay.signed
        out = {}
        for k, c in self.terms.items():
            e = (k >> s) & MASK
            if signed:
                e -= BIAS
            elif e < times:
                continue
            f = mpz(1)
            for i in range(times):
                f *= e - i
            if f:
                out[k - step] = c * f
        return Series(self.spec, out)

    def select(self, pred) -> "Series":
        """Terms whose packed key satisfies ``pred``."""
        return Series(self.spec, {k: c for k, c in self.terms.items() if pred(k)})

    def slice(self, v: Var, e: int) -> "Series":
        """Coefficient of ``v**e`` as a series with ``v`` removed."""
        lay = self.layout
        if v not in lay.index:
            return self if e == 0 else Series(self.spec, {})
        s = lay.shift[v]
        target = e + (BIAS if v in lay.signed else 0)
        step = lay.step[v] * e
        return Series(self.spec, {k - step: c for k, c in self.terms.items()
                                  if (k >> s) & MASK == target})

    def exponents(self, v: Var) -> list[int]:
        lay = self.layout
        if v not in lay.index:
            return [0] if self.terms else []
        return sorted({lay.exp(k, v) for k in self.terms})

    def at_zero(self, vars: Iterable[Var]) -> "Series":
        """Set the given variables to zero."""
        lay = self.layout
        fields = [(lay.shift[v]) for v in vars if v in lay.index]
        return self.select(lambda k: all(((k >> s) & MASK) == 0 for s in fields))

    def components(self) -> dict[int, "Series"]:
        """Homogeneous pieces by w' weight."""
        lay = self.layout
        out: dict[int, dict] = {}
        for k, c in self.terms.items():
            out.setdefault(lay.weight(k), {})[k] = c
        return {w: Series(self.spec, t) for w, t in out.items()}

    def embed(self, spec: TruncationSpec) -> "Series":
        """Re-express in another spec, dropping terms outside it."""
        if spec == self.spec:
            return self
        src, dst = self.layout, _layout(spec)
        out = {}
        for k, c in self.terms.items():
            try:
                nk = dst.encode(dict(src.decode(k)))
            except KeyError:
                continue
            if dst.ok(nk):
                out[nk] = c
        return Series(spec, out)

    def map_monomials(self, spec: TruncationSpec, fn) -> "Series":
        """Apply ``fn(exps) -> (exps, factor) | None`` termwise into ``spec``."""
        src, dst = self.layout, _layout(spec)
        out: dict[int, mpq] = {}
        for k, c in self.terms.items():
            r = fn(dict(src.decode(k)))
            if r is None:
                continue
            exps, f = r
            nk = dst.encode(exps)
            if not dst.ok(nk):
                continue
            out[nk] = out.get(nk, mpq(0)) + c * Q(f)
        return Series(spec, {k: c for k, c in out.items() if c})

    # serialization ----------------------------------------------------
    def to_lines(self) -> list[str]:
        lay = self.layout
        return [_term_text(lay, k, self.terms[k]) for k in self.sorted_keys()]

    def to_text(self) -> str:
        return "\n".join(self.to_lines())

    def to_json_obj(self) -> dict:
        lay = self.layout
        terms = []
        for k in self.sorted_keys():
            terms.append([str(self.terms[k]), _mono_text(lay, k)])
        return {"spec": self.spec.to_dict(), "terms": terms}

    @classmethod
    def from_text(cls, spec: TruncationSpec, text: str) -> "Series":
        terms = []
        for line in text.splitlines():
            line = line.strip()
            if not line:
                continue
            parts = [p.strip() for p in line.split("*")]
            coeff, exps = parts[0], {}
            for p in parts[1:]:
                name, _, e = p.partition("^")
                exps[parse_var(name)] = int(e) if e else 1
            terms.append((exps, coeff))
        return cls.from_terms(spec, terms)

    @classmethod
    def from_json_obj(cls, obj: Mapping) -> "Series":
        spec = TruncationSpec.from_dict(obj["spec"])
        text = "\n".join(c if not m else f"{c} * {m}" for c, m in obj["terms"])
        return cls.from_text(spec, text)


def _canon(lay: _Layout, k: int) -> tuple:
    d = lay.dense(k)
    deg = sum(e for v, e in zip(lay.vars, d) if v.kind != "lam2")
    return (deg, d)


def _mono_text(lay: _Layout, k: int) -> str:
    return " * ".join(f"{v}^{e}" for v, e in lay.decode(k))


def _term_text(lay: _Layout, k: int, c: mpq) -> str:
    m = _mono_text(lay, k)
    return f"{c} * {m}" if m else str(c)


def monomial_text(spec: TruncationSpec, exps: Mapping[Var, int]) -> str:
    lay = _layout(spec)
    return _mono_text(lay, lay.encode(exps)) or "1"


# graded transcendental operations ------------------------------------------

def _graded(a: Series) -> tuple[dict[int, Series], int]:
    comps = a.components()
    return comps, a.layout.weight_bound()


def exp_adic(a: Series) -> Series:
    """exp(a) for a series without weight-zero part."""
    comps, top = _graded(a)
    if any(w <= 0 for w in comps):
        raise NotAugmentationZero("exp_adic needs positive w'-valuation")
    spec = a.spec
    e = {0: Series.one(spec)}
    for w in range(1, top + 1):
        acc = Series.zero(spec)
        for j in range(1, w + 1):
            aj = comps.get(j)
            ew = e.get(w - j)
            if aj is None or ew is None or ew.is_zero():
                continue
            acc = acc + (aj * ew).scale(j)
        e[w] = acc.scale(mpq(1, w))
    out: dict = {}
    for s in e.values():
        out.update(s.terms)
    return Series(spec, out)


def log_adic(a: Series) -> Series:
    """log(a) for a series whose weight-zero part is exactly 1."""
    comps, top = _graded(a)
    if any(w < 0 for w in comps) or comps.get(0) != Series.one(a.spec):
        raise NotUnit("log_adic needs constant term exactly 1")
    spec = a.spec
    h: dict[int, Series] = {}
    for w in range(1, top + 1):
        acc = comps[w].scale(w) if w in comps else Series.zero(spec)
        for j in range(1, w):
            fj, hw = comps.get(j), h.get(w - j)
            if fj is None or hw is None or hw.is_zero():
                continue
            acc = acc - fj * hw
        h[w] = acc
    out: dict = {}
    for w, s in h.items():
        out.update(s.scale(mpq(1, w)).terms)
    return Series(spec, out)


def invert_unit(a: Series) -> Series:
    """Multiplicative inverse; the weight-zero part must be c * lam2**k."""
    comps, top = _graded(a)
    lead = comps.get(0)
    if lead is None or len(lead) != 1 or any(w < 0 for w in comps):
        raise NotInvertible("leading part must be a single nonzero monomial")
    spec = a.spec
    lay = a.layout
    (k0, c0), = lead.terms.items()
    e0 = lay.exp(k0, LAM2) if LAM2 in lay.index else 0
    b0 = Series.monomial(spec, {LAM2: -e0} if e0 else {}, 1 / c0)
    b = {0: b0}
    for w in range(1, top + 1):
        acc = Series.zero(spec)
        for j in range(1, w + 1):
            aj, bw = comps.get(j), b.get(w - j)
            if aj is None or bw is None or bw.is_zero():
                continue
            acc = acc + aj * bw
        b[w] = -(b0 * acc)
    out: dict = {}
    for s in b.values():
        out.update(s.terms)
    return Series(spec, out)


def power(a: Series, alpha) -> Series:
    """a**alpha for rational alpha; the weight-zero part must be 1."""
    comps, top = _graded(a)
    if any(w < 0 for w in comps) or comps.get(0) != Series.one(a.spec):
        raise NotUnit("power needs constant term exactly 1")
    alpha = Q(alpha)
    spec = a.spec
    p = {0: Series.one(spec)}
    for w in range(1, top + 1):
        acc = Series.zero(spec)
        for j in range(1, w + 1):
            aj, pw = comps.get(j), p.get(w - j)
            if aj is None or pw is None or pw.is_zero():
                continue
            f = alpha * j - (w - j)
            if f:
                acc = acc + (aj * pw).scale(f)
        p[w] = acc.scale(mpq(1, w))
    out: dict = {}
    for s in p.values():
        out.update(s.terms)
    return Series(spec, out)


def substitute(a: Series, v: Var, s: Series) -> Series:
    """Replace every occurrence of ``v`` in ``a`` by ``s``."""
    a._check(s)
    spec = a.spec
    if not spec.has(v):
        return a
    exps = a.exponents(v)
    out = Series.zero(spec)
    pos = [e for e in exps if e > 0]
    neg = [e for e in exps if e < 0]
    if 0 in exps:
        out = out + a.slice(v, 0)
    if pos:
        pw = s
        for e in range(1, max(pos) + 1):
            if e > 1:
                pw = pw * s
            if e in pos:
                out = out + a.slice(v, e) * pw
    if neg:
        try:
            inv = invert_unit(s)
        except NotInvertible as exc:
            raise NotUnit(f"cannot substitute a non-unit for {v}") from exc
        pw = inv
        for e in range(-1, min(neg) - 1, -1):
            if e < -1:
                pw = pw * inv
            if e in neg:
                out = out + a.slice(v, e) * pw
    return out


def safe_degree(spec: TruncationSpec, shifts: Iterable[int], bound: int | None = None) -> int:
    """Highest degree at which a check survives the listed degree losses."""
    base = spec.t_degree if bound is None else bound
    d = base - sum(shifts)
    if d < 0:
        raise TruncationTooSmall(f"safe degree {d} < 0 (base {base})")
    return d
