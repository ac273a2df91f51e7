"""Verification reports and the windows on which identities are compared."""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Callable, Mapping

from .errors import TruncationTooSmall
from .series import MASK, Series, TruncationSpec, Var, _canon, layout

PASS, FAIL, SKIPPED = "PASS", "FAIL", "SKIPPED"


@dataclass(frozen=True)
class Window:
    """Region of monomials on which a truncated identity is exact.

    Every bound is optional.  ``max_index`` caps the index of every T/TT
    variable present; ``var_max`` caps single variables.
    """

    t_degree: int | None = None
    kappa_degree: int | None = None
    weight: int | None = None
    max_index: int | None = None
    var_max: tuple = ()

    def predicate(self, spec: TruncationSpec) -> Callable[[int], bool]:
        lay = layout(spec)
        checks = []
        if self.t_degree is not None:
            d = self.t_degree
            checks.append(lambda k: lay.t_deg(k) <= d)
        if self.kappa_degree is not None:
            kd = self.kappa_degree
            checks.append(lambda k: lay.kappa_deg(k) <= kd)
        if self.weight is not None:
            w = self.weight
            checks.append(lambda k: lay.weight(k) <= w)
        fields = []
        if self.max_index is not None:
            fields += [lay.shift[v] for v in lay.vars
                       if v.kind in ("t", "tt") and v.i > self.max_index]
        zero_fields = tuple(fields)
        if zero_fields:
            checks.append(lambda k: all(((k >> s) & MASK) == 0 for s in zero_fields))
        for v, bound in self.var_max:
            if v in lay.index:
                checks.append(lambda k, v=v, b=bound: lay.exp(k, v) <= b)
        return lambda k: all(c(k) for c in checks)

    def describe(self) -> dict:
        d = {}
        for name in ("t_degree", "kappa_degree", "weight", "max_index"):
            val = getattr(self, name)
            if val is not None:
                d[name] = val
        for v, b in self.var_max:
            d[f"{v}_max"] = b
        return d

    def restrict(self, s: Series) -> Series:
        return s.select(self.predicate(s.spec))


@dataclass
class VerificationReport:
    identity_id: str
    anchor: str
    truncation: dict
    safe_degree: int | None
    status: str
    failure: dict | None = None
    window: dict = field(default_factory=dict)
    reason: str | None = None
    elapsed_ms: int = 0

    @property
    def passed(self) -> bool:
        return self.status == PASS

    def to_dict(self, timings: bool = False) -> dict:
        d = {"identity_id": self.identity_id, "anchor": self.anchor,
             "truncation": self.truncation, "safe_degree": self.safe_degree,
             "window": self.window, "status": self.status}
        if self.failure is not None:
            d["failure"] = self.failure
        if self.reason is not None:
            d["reason"] = self.reason
        if timings:
            d["elapsed_ms"] = self.elapsed_ms
        return d

    @classmethod
    def from_dict(cls, d: Mapping) -> "VerificationReport":
        return cls(identity_id=d["identity_id"], anchor=d["anchor"],
                   truncation=d["truncation"], safe_degree=d["safe_degree"],
                   status=d["status"], failure=d.get("failure"),
                   window=d.get("window", {}), reason=d.get("reason"),
                   elapsed_ms=d.get("elapsed_ms", 0))

    def line(self) -> str:
        s = f"{self.status:7s} {self.identity_id}"
        if self.safe_degree is not None:
            s += f"  [safe degree {self.safe_degree}]"
        if self.failure:
            f = self.failure
            s += f"  at {f['monomial']}: expected {f['expected']}, got {f['actual']}"
        if self.reason:
            s += f"  ({self.reason})"
        return s


def truncation_echo(spec: TruncationSpec) -> dict:
    return spec.to_dict()


def first_difference(lhs: Series, rhs: Series, window: Window | None = None):
    """First monomial (canonical order) where lhs and rhs differ inside window."""
    diff = lhs - rhs
    pred = window.predicate(lhs.spec) if window else (lambda k: True)
    lay = lhs.layout
    inside = [k for k in diff.terms if pred(k)]
    if not inside:
        return None
    k = min(inside, key=lambda k: _canon(lay, k))
    mono = " * ".join(f"{v}^{e}" for v, e in lay.decode(k)) or "1"
    return {"monomial": mono,
            "expected": str(rhs.terms.get(k, 0)),
            "actual": str(lhs.terms.get(k, 0))}


def compare(identity_id: str, anchor: str, lhs: Series, rhs: Series,
            window: Window, safe: int | None, spec: TruncationSpec | None = None,
            started: float | None = None) -> VerificationReport:
    """PASS iff lhs and rhs agree on every monomial inside ``window``."""
    fail = first_difference(lhs, rhs, window)
    return VerificationReport(
        identity_id=identity_id, anchor=anchor,
        truncation=truncation_echo(spec or lhs.spec), safe_degree=safe,
        status=FAIL if fail else PASS, failure=fail, window=window.describe(),
        elapsed_ms=_elapsed(started))


def scalar_report(identity_id: str, anchor: str, ok: bool, spec: TruncationSpec | None,
                  expected: str = "", actual: str = "", monomial: str = "1",
                  safe: int | None = None, started: float | None = None,
                  truncation: dict | None = None) -> VerificationReport:
    """Report for a check that is not a series comparison."""
    fail = None if ok else {"monomial": monomial, "expected": expected, "actual": actual}
    return VerificationReport(
        identity_id=identity_id, anchor=anchor,
        truncation=truncation if truncation is not None else
        (truncation_echo(spec) if spec else {}),
        safe_degree=safe, status=PASS if ok else FAIL, failure=fail,
        elapsed_ms=_elapsed(started))


def skipped(identity_id: str, anchor: str, spec: TruncationSpec | None,
            exc: TruncationTooSmall) -> VerificationReport:
    return VerificationReport(
        identity_id=identity_id, anchor=anchor,
        truncation=truncation_echo(spec) if spec else {}, safe_degree=None,
        status=SKIPPED, reason=f"TruncationTooSmall: {exc}")


def combine(identity_id: str, anchor: str, reports: list[VerificationReport]) -> VerificationReport:
    """Fold sub-checks into one report; the first failure wins."""
    for r in reports:
        if r.status != PASS:
            r2 = VerificationReport(**{**r.__dict__})
            r2.identity_id, r2.anchor = identity_id, anchor
            return r2
    base = reports[0]
    return VerificationReport(
        identity_id=identity_id, anchor=anchor, truncation=base.truncation,
        safe_degree=min((r.safe_degree for r in reports if r.safe_degree is not None),
                        default=None),
        status=PASS, window=base.window,
        elapsed_ms=sum(r.elapsed_ms for r in reports))


def _elapsed(started: float | None) -> int:
    if started is None:
        return 0
    return int((time.perf_counter() - started) * 1000)


def timer() -> float:
    return time.perf_counter()
