"""Polynomial differential operators in normal (Wick) order.

A term is ``coeff * monomial * partials`` with every multiplication to the
left of every derivative.  Composition reorders with the Leibniz rule, so two
operators are equal exactly when their normal forms are.
"""

from __future__ import annotations

from itertools import product
from math import comb
from typing import Iterable, Mapping

from gmpy2 import mpq

from .series import LAM2, Q, Series, Var, Z, ZINV

Mono = tuple  # ((Var, exponent), ...) sorted by Var.order
Parts = tuple  # ((Var, count), ...) sorted by Var.order


def _norm(pairs: Mapping[Var, int]) -> tuple:
    return tuple(sorted(((v, e) for v, e in pairs.items() if e), key=lambda p: p[0].order))


def _falling(e: int, k: int) -> int:
    out = 1
    for i in range(k):
        out *= e - i
    return out


class DiffOperator:
    __slots__ = ("terms",)

    def __init__(self, terms: Mapping | None = None):
        self.terms = {k: v for k, v in (terms or {}).items() if v}

    @classmethod
    def term(cls, coeff=1, mono: Mapping[Var, int] | None = None,
             parts: Mapping[Var, int] | None = None) -> "DiffOperator":
        return cls({(_norm(mono or {}), _norm(parts or {})): Q(coeff)})

    @classmethod
    def scalar(cls, c) -> "DiffOperator":
        return cls.term(c)

    @classmethod
    def partial(cls, v: Var, n: int = 1) -> "DiffOperator":
        return cls.term(1, None, {v: n})

    @classmethod
    def multiply(cls, v: Var, e: int = 1, coeff=1) -> "DiffOperator":
        return cls.term(coeff, {v: e})

    # algebra ----------------------------------------------------------
    def __add__(self, other: "DiffOperator") -> "DiffOperator":
        out = dict(self.terms)
        for k, c in other.terms.items():
            out[k] = out.get(k, mpq(0)) + c
        return DiffOperator(out)

    def __neg__(self) -> "DiffOperator":
        return DiffOperator({k: -c for k, c in self.terms.items()})

    def __sub__(self, other: "DiffOperator") -> "DiffOperator":
        return self + (-other)

    def scale(self, c) -> "DiffOperator":
        c = Q(c)
        return DiffOperator({k: v * c for k, v in self.terms.items()})

    def __matmul__(self, other: "DiffOperator") -> "DiffOperator":
        """Composition ``self o other`` in normal form."""
        out: dict = {}
        for (ma, pa), ca in self.terms.items():
            pa_d = dict(pa)
            for (mb, pb), cb in other.terms.items():
                mb_d = dict(mb)
                shared = [v for v in pa_d if v in mb_d]
                ranges = [range(min(pa_d[v], mb_d[v]) + 1) if mb_d[v] > 0
                          else range(pa_d[v] + 1) for v in shared]
                for betas in product(*ranges):
                    f = ca * cb
                    mono = dict(ma)
                    parts = dict(pb)
                    for v, e in mb_d.items():
                        mono[v] = mono.get(v, 0) + e
                    for v, a in pa_d.items():
                        parts[v] = parts.get(v, 0) + a
                    for v, b in zip(shared, betas):
                        if b == 0:
                            continue
                        f *= comb(pa_d[v], b) * _falling(mb_d[v], b)
                        mono[v] -= b
                        parts[v] -= b
                    if f:
                        key = (_norm(mono), _norm(parts))
                        out[key] = out.get(key, mpq(0)) + f
        return DiffOperator(out)

    def commutator(self, other: "DiffOperator") -> "DiffOperator":
        return (self @ other) - (other @ self)

    def __eq__(self, other) -> bool:
        return isinstance(other, DiffOperator) and self.terms == other.terms

    def __hash__(self):
        raise TypeError("DiffOperator is not hashable")

    def is_zero(self) -> bool:
        return not self.terms

    def indices(self, key) -> list[int]:
        mono, parts = key
        return [v.i for v, _ in mono + parts if v.kind in ("t", "tt")]

    def restrict(self, max_index: int) -> "DiffOperator":
        """Drop terms touching a coupling index above ``max_index``."""
        return DiffOperator({k: c for k, c in self.terms.items()
                             if all(i <= max_index for i in self.indices(k))})

    def sorted_items(self):
        def order(item):
            (mono, parts), _ = item
            return ([(v.order, e) for v, e in mono], [(v.order, e) for v, e in parts])
        return sorted(self.terms.items(), key=order)

    def to_text(self) -> str:
        lines = []
        for (mono, parts), c in self.sorted_items():
            bits = [str(c)] + [f"{v}^{e}" for v, e in mono]
            bits += [f"d[{v}]^{n}" for v, n in parts]
            lines.append(" * ".join(bits))
        return "\n".join(lines)

    def __repr__(self) -> str:
        return f"DiffOperator({self.to_text()!r})"

    # action on series -------------------------------------------------
    def apply(self, s: Series) -> Series:
        """Act on a series; ``z`` acts through ``zinv`` (d/dz = -zinv^2 d/dzinv)."""
        spec = s.spec
        lay = s.layout
        ok = lay.ok
        cache: dict[Parts, Series] = {(): s}
        out: dict = {}
        for (mono, parts), c in self.terms.items():
            f = cache.get(parts)
            if f is None:
                f = s
                for v, n in parts:
                    if v == Z:
                        for _ in range(n):
                            f = f.derive(ZINV).mul_monomial({ZINV: 2}, -1)
                    else:
                        f = f.derive(v, n)
                cache[parts] = f
            if f.is_zero():
                continue
            exps: dict[Var, int] = {}
            dropped = False
            for v, e in mono:
                tv, te = (ZINV, -e) if v == Z else (v, e)
                if not spec.has(tv):
                    dropped = True
                    break
                exps[tv] = exps.get(tv, 0) + te
            if dropped:
                continue
            shift = lay.encode(exps) - lay.bias
            # multipliers that raise nothing bounded cannot leave the spec
            if any(e > 0 for v, e in exps.items() if v != LAM2):
                for k, v in f.terms.items():
                    nk = k + shift
                    if ok(nk):
                        out[nk] = out.get(nk, 0) + c * v
            else:
                for k, v in f.terms.items():
                    nk = k + shift
                    out[nk] = out.get(nk, 0) + c * v
        return Series(spec, {k: v for k, v in out.items() if v})

def compose_all(ops: Iterable[DiffOperator]) -> DiffOperator:
    ops = list(ops)
    out = ops[0]
    for op in ops[1:]:
        out = out @ op
    return out


__all__ = ["DiffOperator", "compose_all", "LAM2"]
