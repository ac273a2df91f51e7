from __future__ import annotations

import json

from moyalgrav.errors import TruncationTooSmall
from moyalgrav.report import (FAIL, PASS, SKIPPED, VerificationReport, Window, combine, compare,
                              first_difference, scalar_report, skipped)
from moyalgrav.series import LAM2, Series, T, TruncationSpec

SPEC = TruncationSpec(t_degree=4, n_max=3)


def mono(exps, c=1):
    return Series.monomial(SPEC, exps, c)


def test_first_difference_is_canonical_minimum():
    a = mono({T(0): 2}) + mono({T(1): 1}, 3)
    b = mono({T(1): 1}, 2)
    got = first_difference(a, b)
    assert got is not None
    # both t0^2 and t1 differ; the lower degree one comes first
    assert got["monomial"] == "t1^1"
    assert (got["expected"], got["actual"]) == ("2", "3")


def test_window_hides_differences():
    a = mono({T(3): 1}) + mono({T(0): 4})
    zero = Series.zero(SPEC)
    assert first_difference(a, zero, Window(max_index=2, t_degree=3)) is None
    assert first_difference(a, zero, Window(max_index=2))["monomial"] == "t0^4"
    assert first_difference(a, zero, Window(var_max=((T(0), 3),)))["monomial"] == "t3^1"


def test_compare_statuses():
    a = mono({T(0): 1, LAM2: -1})
    ok = compare("x", "anchor", a, a, Window(t_degree=2), 2)
    assert ok.status == PASS and ok.failure is None
    assert ok.window == {"t_degree": 2}
    bad = compare("x", "anchor", a, Series.zero(SPEC), Window(), None)
    assert bad.status == FAIL
    assert bad.failure == {"monomial": "t0^1 * lam2^-1", "expected": "0", "actual": "1"}


def test_report_dict_round_trip():
    rep = compare("id", "a", mono({T(2): 1}), Series.zero(SPEC), Window(weight=3), 3)
    d = rep.to_dict()
    assert "elapsed_ms" not in d
    assert VerificationReport.from_dict(json.loads(json.dumps(d))).to_dict() == d
    assert "elapsed_ms" in rep.to_dict(timings=True)


def test_combine_first_failure_wins():
    good = scalar_report("a", "", True, SPEC)
    bad1 = scalar_report("b", "", False, SPEC, "1", "2", monomial="t0")
    bad2 = scalar_report("c", "", False, SPEC, "3", "4")
    rep = combine("all", "anchor", [good, bad1, bad2])
    assert rep.identity_id == "all" and rep.status == FAIL
    assert rep.failure["monomial"] == "t0"
    assert bad1.identity_id == "b"
    assert combine("ok", "", [good, good]).passed


def test_skipped_report():
    rep = skipped("s", "", None, TruncationTooSmall("too small"))
    assert rep.status == SKIPPED
    assert rep.reason == "TruncationTooSmall: too small"
    assert "SKIPPED" in rep.line()


def test_failure_always_carries_counterexample():
    rep = compare("x", "", mono({T(1): 2}), mono({T(1): 2}, 2), Window(), None)
    assert set(rep.failure) == {"monomial", "expected", "actual"}
    assert "expected 2, got 1" in rep.line()
