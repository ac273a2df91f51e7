"""Command-line driver: ``verify`` runs identity suites, ``emit`` prints series.

Settings resolve in the order defaults < config file < environment
(``MOYALGRAV_<KEY>``) < command-line flags.  Exit codes: 0 when every
selected check passes, 1 on any FAIL, 2 on usage errors.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from functools import cached_property
from typing import Callable

from . import gravity1d, nc, open_gravity, saddle, solutions, star
from .errors import TruncationTooSmall
from .report import FAIL, PASS, SKIPPED, VerificationReport, Window, compare, scalar_report, skipped
from .series import T, TT, TruncationSpec

ENV_PREFIX = "MOYALGRAV_"
SUITES = ("virasoro", "burgers", "genus", "star", "bch", "nc", "gauge", "pde", "gg",
          "open", "algebra")
EMIT_NAMES = ("z1d", "m1d", "genus:<g>", "z_tm", "m_tm", "u_star", "w1", "zo",
              "heat_theta", "sto_theta")
INT_KEYS = ("t_degree", "kappa_degree", "n_couplings", "genus", "z_order", "l_order", "jobs")
STAR_COUPLINGS = 3  # coupling cap for the two-matrix suites
GENERAL_PAIRS = ((0, 0), (0, 1), (1, 0), (1, 1))


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    suites: list = field(default_factory=lambda: ["all"])
    t_degree: int = 8
    kappa_degree: int = 3
    n_couplings: int = 8
    genus: int = 4
    z_order: int = 6
    l_order: int = 6
    json: str | None = None
    format: str = "human"
    timings: bool = False
    jobs: int = 1

    def validate(self) -> None:
        for key in INT_KEYS:
            if getattr(self, key) < 0:
                raise UsageError(f"{key} must be non-negative")
        if self.jobs < 1:
            raise UsageError("jobs must be at least 1")
        if self.genus > saddle.MAX_GENUS:
            raise UsageError(f"genus must be at most {saddle.MAX_GENUS}")
        if self.format not in ("human", "json"):
            raise UsageError(f"unknown format {self.format!r}")
        for s in self.suites:
            if s != "all" and s not in SUITES:
                raise UsageError(f"unknown suite {s!r}; choose from all, {', '.join(SUITES)}")

    def selected(self) -> list[str]:
        if "all" in self.suites:
            return list(SUITES)
        return sorted(set(self.suites), key=SUITES.index)

    def echo(self) -> dict:
        """The parts of the config that determine report content."""
        d = asdict(self)
        for key in ("json", "format", "timings", "jobs"):
            d.pop(key)
        d["suites"] = self.selected()
        return d


def _coerce(key: str, value: str):
    if key in INT_KEYS:
        try:
            return int(value)
        except ValueError:
            raise UsageError(f"{key} expects an integer, got {value!r}") from None
    if key == "timings":
        if value.lower() not in ("1", "0", "true", "false", "yes", "no"):
            raise UsageError(f"timings expects a boolean, got {value!r}")
        return value.lower() in ("1", "true", "yes")
    if key in ("suites", "suite"):
        return [s.strip() for s in value.split(",") if s.strip()]
    return value


def _key(name: str) -> str:
    key = name.strip().lower().replace("-", "_")
    key = "suites" if key == "suite" else key
    if key not in RunConfig.__dataclass_fields__:
        raise UsageError(f"unknown setting {name!r}")
    return key


def read_config_file(path: str) -> dict:
    """Flat ``key = value`` lines; ``#`` starts a comment."""
    out = {}
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from None
    for no, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{no}: expected key = value")
        k, v = line.split("=", 1)
        key = _key(k)
        out[key] = _coerce(key, v.strip())
    return out


def read_env(environ=None) -> dict:
    environ = os.environ if environ is None else environ
    out = {}
    for name, value in environ.items():
        if name.startswith(ENV_PREFIX):
            key = _key(name[len(ENV_PREFIX):])
            out[key] = _coerce(key, value)
    return out


# suites -----------------------------------------------------------------------

class Data:
    """Lazily built objects shared by the checks of one process."""

    def __init__(self, cfg: RunConfig):
        self.cfg = cfg

    @cached_property
    def spec(self) -> TruncationSpec:
        return TruncationSpec(t_degree=self.cfg.t_degree, n_max=self.cfg.n_couplings)

    @cached_property
    def gravity(self):
        return gravity1d.z1d(self.spec)

    @cached_property
    def genus_table(self):
        return saddle.genus_pieces(self.spec, self.cfg.genus)

    @cached_property
    def saddle(self):
        return saddle.solve_saddle(self.spec)

    @cached_property
    def star_spec(self) -> TruncationSpec:
        if self.cfg.kappa_degree < 1:
            raise TruncationTooSmall("two-matrix checks need kappa_degree >= 1")
        return star.StarContext.single().spec(
            weight=self.cfg.t_degree, n_max=min(self.cfg.n_couplings, STAR_COUPLINGS),
            kappa_degree=self.cfg.kappa_degree)

    @cached_property
    def general_ctx(self):
        pairs = [p for p in GENERAL_PAIRS if max(p) <= self.cfg.n_couplings]
        return star.StarContext.general(pairs)

    @cached_property
    def general_spec(self) -> TruncationSpec:
        if self.cfg.kappa_degree < 1:
            raise TruncationTooSmall("two-matrix checks need kappa_degree >= 1")
        return self.general_ctx.spec(
            weight=self.cfg.t_degree, n_max=min(self.cfg.n_couplings, STAR_COUPLINGS),
            kappa_degree=self.cfg.kappa_degree)

    @cached_property
    def tm(self):
        return star.two_matrix(self.star_spec, star.StarContext.single())

    @cached_property
    def nc(self):
        t = self.tm
        return nc.NCData(tm=t, m=star.log_star(t.z, t.ctx), ctx=t.ctx)

    @cached_property
    def general_z(self):
        return star.z_tm(self.general_spec, self.general_ctx)

    @cached_property
    def gauge(self):
        return nc.gauge_field(self.nc)

    @cached_property
    def pde_spec(self) -> TruncationSpec:
        return solutions.bivariate_spec(self.cfg.t_degree, self.cfg.t_degree)

    @cached_property
    def resolvent(self):
        return open_gravity.resolvent(self.spec, self.cfg.z_order)

    @cached_property
    def open_partition(self):
        return open_gravity.open_partition(self.spec, self.cfg.l_order)


Check = tuple  # (identity_id, anchor, thunk returning report(s))


def _virasoro(d: Data) -> list[Check]:
    out = [(f"virasoro.L{m}", "Virasoro constraint L_m Z = 0",
            lambda m=m: gravity1d.verify_virasoro(m, d.spec, d.gravity)) for m in range(-1, 5)]
    out.append(("burgers.string_reduction", "L_m Z reduces to derivatives of L_-1 Z",
                lambda: gravity1d.verify_string_reduction(d.spec, d.gravity)))
    out.append(("genus.string_slices", "genus-graded string equation",
                lambda: gravity1d.verify_string_slices(d.spec, d.cfg.genus, d.gravity)))
    return out


def _gaussian_closed_form(d: Data) -> VerificationReport:
    t0 = gravity1d.timer()
    if d.cfg.n_couplings < 1:
        raise TruncationTooSmall("closed form needs t1")
    sub = TruncationSpec(t_degree=d.cfg.t_degree, n_max=1)
    return compare("burgers.gaussian_closed_form", "Z(t0, t1) in closed form",
                   gravity1d.z_terms(sub), solutions.gaussian_t0_t1(sub),
                   Window(t_degree=d.cfg.t_degree), d.cfg.t_degree, started=t0)


def _burgers(d: Data) -> list[Check]:
    out = [("burgers.gaussian_closed_form", "Z(t0, t1) in closed form",
            lambda: _gaussian_closed_form(d))]
    for n in range(1, 6):
        out.append((f"burgers.bz.n{n}", "heat-type flow of Z",
                    lambda n=n: gravity1d.verify_bz(n, d.spec, d.gravity)))
        out.append((f"burgers.recurrence.n{n}", "free-energy recurrence",
                    lambda n=n: gravity1d.verify_burgers_recurrence(n, d.spec, d.gravity)))
    out.append(("burgers.cole_hopf", "Burgers equation for u = dM/dt0",
                lambda: gravity1d.verify_cole_hopf_consistency(d.spec, d.gravity)))
    out.append(("burgers.string_contraction", "string-equation contraction",
                lambda: gravity1d.verify_string_contraction(d.spec, d.gravity)))
    return out


def _genus(d: Data) -> list[Check]:
    return [
        ("genus.slices", "genus expansion of log Z",
         lambda: saddle.verify_genus_against_logz(d.spec, d.cfg.genus, d.gravity,
                                                  d.genus_table, d.saddle)),
        ("saddle.i_derivatives", "I_n coordinates",
         lambda: saddle.verify_i_derivatives(d.spec, d.saddle)),
        ("saddle.t_from_i", "inverse coordinate change",
         lambda: saddle.verify_t_from_i(d.spec, d.saddle)),
        ("saddle.jacobian", "Jacobian of the coordinate change",
         lambda: saddle.verify_jacobian(d.spec, d.saddle)),
        ("genus.saddle_form", "Z expanded around the saddle point",
         lambda: saddle.verify_z_saddle_form(d.spec, False, d.gravity)),
        ("genus.saddle_form.printed", "Z expanded around the saddle point, printed weights",
         lambda: saddle.verify_z_saddle_form(d.spec, True, d.gravity)),
    ]


def _taylor(d: Data) -> VerificationReport:
    if d.cfg.kappa_degree < 3:
        raise TruncationTooSmall("Taylor table needs kappa_degree >= 3")
    return star.verify_taylor_table()


def _star(d: Data) -> list[Check]:
    single = star.StarContext.single()
    out = [
        ("star.taylor_table", "Taylor table of the Gaussian two-matrix model", lambda: _taylor(d)),
        ("star.normalization", "zero-coupling value",
         lambda: star.verify_normalization(d.star_spec, single, d.tm)),
        ("star.reduction", "reduction at tt = 0",
         lambda: star.verify_reduction(d.star_spec, single, d.tm)),
        ("star.genus_split", "genus-zero two-matrix free energy",
         lambda: star.verify_genus_split_tm(d.star_spec, single, d.tm, d.nc.m)),
    ]
    for m, n in GENERAL_PAIRS:
        out.append((f"star.general_hierarchy.{m}{n}", "kappa_(m,n) flow",
                    lambda m=m, n=n: _general_hierarchy(d, m, n)))
    return out


def _general_hierarchy(d: Data, m: int, n: int) -> VerificationReport:
    if max(m, n) > min(d.cfg.n_couplings, STAR_COUPLINGS):
        raise TruncationTooSmall(f"pair {(m, n)} needs n_couplings >= {max(m, n)}")
    return star.verify_general_star_hierarchy(m, n, d.general_spec, d.general_ctx, d.general_z)


def _bch(d: Data) -> list[Check]:
    single = star.StarContext.single()
    return [
        ("bch.gaussian", "BCH series for Gaussian couplings",
         lambda: star.verify_bch(d.star_spec, single, True)),
        ("bch.general", "BCH series for general couplings",
         lambda: star.verify_bch(d.star_spec, single, False, d.tm)),
    ]


def _nc(d: Data) -> list[Check]:
    out = [("nc.covariant_defining", "defining relation of the covariant derivative",
            lambda: nc.verify_defining(d.nc))]
    names = [T(0), T(1), TT(0), TT(1)]
    for i, v1 in enumerate(names):
        for v2 in names[i + 1:]:
            out.append((f"nc.flip.{v1}.{v2}", "flip relation",
                        lambda v1=v1, v2=v2: _flip(d, v1, v2)))
    for tilde in (False, True):
        tag = ".tilde" if tilde else ""
        out.append((f"nc.burgers{tag}", "noncommutative Burgers equation",
                    lambda tilde=tilde: nc.verify_nc_burgers(d.nc, tilde)))
        for n in (1, 2, 3):
            out.append((f"nc.hierarchy{tag}.n{n}", "noncommutative Burgers hierarchy",
                        lambda n=n, tilde=tilde: nc.verify_nc_hierarchy(d.nc, n, tilde)))
    for n in (1, 2, 3):
        out.append((f"nc.hierarchy.left.n{n}", "hierarchy with left multiplication",
                    lambda n=n: nc.verify_nc_hierarchy(d.nc, n, False, True)))
    out += [
        ("nc.sto_printed", "noncommutative STO equation", lambda: nc.verify_nc_sto_printed(d.nc)),
        ("nc.tau", "linear flows of Z^TM", lambda: nc.verify_tau(d.nc)),
        ("nc.kappa0", "commutative limits", lambda: nc.verify_kappa0(d.nc)),
    ]
    return out


def _flip(d: Data, v1, v2) -> VerificationReport:
    if max(v1.i, v2.i) > d.star_spec.n_max:
        raise TruncationTooSmall(f"flip {v1}, {v2} needs more couplings")
    return nc.verify_flip(d.nc, v1, v2)


def _gauge(d: Data) -> list[Check]:
    return [
        ("gauge.field_strength", "flatness of the noncommutative U(1) connection",
         lambda: nc.verify_field_strength(d.nc, d.gauge)),
        ("gauge.flat_connection", "flat connection between the two families",
         lambda: nc.verify_flat_connection(d.nc)),
    ]


def _pde(d: Data) -> list[Check]:
    heat = lambda: solutions.heat_kernel_theta(d.pde_spec)  # noqa: E731
    sto = lambda: solutions.sto_theta(d.pde_spec)  # noqa: E731
    D = d.cfg.t_degree
    return [
        ("pde.heat", "heat equation", lambda: solutions.verify_heat_equation(heat())),
        ("pde.sto_linear", "third-order linear equation",
         lambda: solutions.verify_third_order(sto())),
        ("pde.cole_hopf.burgers", "Cole-Hopf image solves Burgers",
         lambda: solutions.verify_cole_hopf(heat(), "burgers")),
        ("pde.cole_hopf.sto", "Cole-Hopf image solves STO",
         lambda: solutions.verify_cole_hopf(sto(), "sto")),
        ("pde.heat_mapping", "heat-kernel theta maps onto Z(t0, t1)",
         lambda: solutions.verify_heat_mapping(heat(), D)),
        ("pde.sto_mapping", "STO theta maps onto Z(t0, t2)",
         lambda: solutions.verify_sto_mapping(sto(), D)),
    ]


def _gg_extra() -> list[VerificationReport]:
    t0 = gravity1d.timer()
    res = solutions.constant_coefficient_residual()
    top = res.coeff(solutions.xi, 2)
    nonzero = scalar_report("gg.constant_coefficient", "forced profile is not constant-coefficient",
                            top != 0, None, "nonzero xi^2 coefficient", str(top),
                            monomial="xi^2", started=t0)
    return [nonzero]


def _gg(d: Data) -> list[Check]:
    return [
        ("gg.reduction", "(G'/G) reduction of the integrated Burgers equation",
         lambda: solutions.verify_gg_reduction()),
        ("gg.obstruction", "forced profile leaves the constant-coefficient class",
         lambda: solutions.gg_obstruction()),
        ("gg.obstruction.a0_zero", "obstruction identity at a0 = 0",
         lambda: _renamed(solutions.gg_obstruction(a0=0), "gg.obstruction.a0_zero")),
        ("gg.constant_coefficient", "forced profile is not constant-coefficient", _gg_extra),
    ]


def _renamed(rep: VerificationReport, ident: str) -> VerificationReport:
    rep.identity_id = ident
    return rep


def _open(d: Data) -> list[Check]:
    cfg = d.cfg
    out = [
        ("open.moments", "Gaussian moments", lambda: open_gravity.verify_moments(d.spec)),
        ("open.residues", "residues of W1",
         lambda: open_gravity.verify_residues(d.spec, cfg.z_order, d.resolvent)),
        ("open.shift", "open partition function as a shifted closed one",
         lambda: open_gravity.verify_shift(d.spec, cfg.l_order, d.open_partition)),
    ]
    for m in range(-1, 4):
        out += [
            (f"open.tilde.L{m}", "open constraint on Z^o",
             lambda m=m: open_gravity.verify_tilde(m, d.spec, cfg.l_order, d.open_partition)),
            (f"open.op.L{m}", "open constraint on W1",
             lambda m=m: open_gravity.verify_op_on_w1(m, d.spec, cfg.z_order, d.resolvent)),
            (f"open.bar.L{m}", "reparametrization identity on W1",
             lambda m=m: open_gravity.verify_bar(m, d.spec, cfg.z_order, d.resolvent)),
        ]
    return out


def _algebra(d: Data) -> list[Check]:
    out = []
    for family in open_gravity.ALGEBRA_FAMILIES:
        for m in range(-1, 4):
            for n in range(m + 1, 4):
                out.append((f"algebra.{family}.{m}.{n}", "operator algebra closure",
                            lambda f=family, m=m, n=n:
                            open_gravity.verify_operator_algebra(f, m, n, d.spec)))
    return out


SUITE_CHECKS: dict[str, Callable[[Data], list[Check]]] = {
    "virasoro": _virasoro, "burgers": _burgers, "genus": _genus, "star": _star,
    "bch": _bch, "nc": _nc, "gauge": _gauge, "pde": _pde, "gg": _gg, "open": _open,
    "algebra": _algebra,
}


def run_suite(name: str, cfg: RunConfig, data: Data | None = None) -> list[VerificationReport]:
    data = data or Data(cfg)
    out = []
    for ident, anchor, thunk in SUITE_CHECKS[name](data):
        try:
            got = thunk()
        except TruncationTooSmall as exc:
            got = skipped(ident, anchor, None, exc)
        out.extend(got if isinstance(got, list) else [got])
    return out


def _suite_worker(args) -> list[VerificationReport]:
    name, cfg = args
    return run_suite(name, cfg)


def collect(cfg: RunConfig) -> list[VerificationReport]:
    names = cfg.selected()
    if cfg.jobs > 1 and len(names) > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            parts = list(pool.map(_suite_worker, [(n, cfg) for n in names]))
    else:
        data = Data(cfg)
        parts = [run_suite(n, cfg, data) for n in names]
    reports = [r for part in parts for r in part]
    reports.sort(key=lambda r: r.identity_id)
    return reports


def summary(reports: list[VerificationReport]) -> dict:
    return {"pass": sum(r.status == PASS for r in reports),
            "fail": sum(r.status == FAIL for r in reports),
            "skipped": sum(r.status == SKIPPED for r in reports)}


def render_json(cfg: RunConfig, reports: list[VerificationReport]) -> str:
    doc = {"config": cfg.echo(),
           "reports": [r.to_dict(cfg.timings) for r in reports],
           "summary": summary(reports)}
    return canonical_json(doc)


def canonical_json(doc) -> str:
    return json.dumps(doc, indent=2, sort_keys=True, ensure_ascii=True) + "\n"


def render_human(cfg: RunConfig, reports: list[VerificationReport]) -> str:
    lines = []
    for r in reports:
        line = r.line()
        if cfg.timings:
            line += f"  {r.elapsed_ms} ms"
        lines.append(line)
    s = summary(reports)
    lines.append(f"{s['pass']} passed, {s['fail']} failed, {s['skipped']} skipped")
    return "\n".join(lines) + "\n"


def run(cfg: RunConfig, out=None) -> int:
    """Run the selected suites, write reports, return the exit code."""
    out = out or sys.stdout
    cfg.validate()
    reports = collect(cfg)
    text = render_json(cfg, reports)
    if cfg.json:
        with open(cfg.json, "w", encoding="utf-8") as fh:
            fh.write(text)
    out.write(text if cfg.format == "json" else render_human(cfg, reports))
    return 1 if any(r.status == FAIL for r in reports) else 0


# emit -------------------------------------------------------------------------

def emit_series(name: str, cfg: RunConfig):
    """The named object at the configured truncation."""
    d = Data(cfg)
    if name == "z1d":
        return d.gravity.z
    if name == "m1d":
        return d.gravity.m
    if name.startswith("genus:"):
        try:
            g = int(name.split(":", 1)[1])
        except ValueError:
            raise UsageError(f"bad genus in {name!r}") from None
        if not 0 <= g <= min(cfg.genus, saddle.MAX_GENUS):
            raise UsageError(f"genus {g} outside 0..{min(cfg.genus, saddle.MAX_GENUS)}")
        return d.genus_table[g]
    if name == "z_tm":
        return _z_tm_box(cfg)
    if name == "m_tm":
        return d.nc.m
    if name == "u_star":
        return d.nc.u()
    if name == "w1":
        return d.resolvent.w1
    if name == "zo":
        return d.open_partition.zo
    if name == "heat_theta":
        return solutions.heat_kernel_theta(d.pde_spec)
    if name == "sto_theta":
        return solutions.sto_theta(d.pde_spec)
    raise UsageError(f"unknown object {name!r}; choose from {', '.join(EMIT_NAMES)}")


def _z_tm_box(cfg: RunConfig):
    """Z^TM complete for t-degree <= D and kappa-degree <= K.

    The star product preserves the weight grading, so weight D + 2K holds
    every such monomial exactly.
    """
    ctx = star.StarContext.single()
    spec = ctx.spec(weight=cfg.t_degree + 2 * cfg.kappa_degree,
                    n_max=min(cfg.n_couplings, STAR_COUPLINGS), kappa_degree=cfg.kappa_degree)
    return Window(t_degree=cfg.t_degree).restrict(star.z_tm(spec, ctx))


def render_series(s, fmt: str) -> str:
    if fmt == "json":
        return canonical_json(s.to_json_obj())
    if fmt == "text":
        return s.to_text() + "\n"
    raise UsageError(f"unknown format {fmt!r}")


# argument parsing ---------------------------------------------------------------

def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="moyalgrav", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", help="flat key = value settings file")
        sp.add_argument("--t-degree", type=int, dest="t_degree")
        sp.add_argument("--kappa-degree", type=int, dest="kappa_degree")
        sp.add_argument("--n-couplings", type=int, dest="n_couplings")
        sp.add_argument("--genus", type=int)
        sp.add_argument("--z-order", type=int, dest="z_order")
        sp.add_argument("--l-order", type=int, dest="l_order")

    v = sub.add_parser("verify", help="run identity suites")
    common(v)
    v.add_argument("--suite", action="append", dest="suites",
                   help="suite id, repeatable or comma-separated (default: all)")
    v.add_argument("--json", help="also write the JSON report to this path")
    v.add_argument("--format", choices=("human", "json"))
    v.add_argument("--timings", action="store_true", default=None)
    v.add_argument("--jobs", type=int)

    e = sub.add_parser("emit", help="print a series")
    common(e)
    e.add_argument("--name", required=True)
    e.add_argument("--format", choices=("text", "json"), default="text", dest="emit_format")
    e.add_argument("--output", help="write to this path instead of stdout")
    return p


def build_config(ns: argparse.Namespace, environ=None) -> RunConfig:
    values: dict = {}
    if ns.config:
        values.update(read_config_file(ns.config))
    values.update(read_env(environ))
    for key in RunConfig.__dataclass_fields__:
        val = getattr(ns, key, None)
        if val is None:
            continue
        if key == "suites":
            val = [s.strip() for item in val for s in item.split(",") if s.strip()]
        values[key] = val
    try:
        cfg = RunConfig(**values)
    except TypeError as exc:
        raise UsageError(str(exc)) from None
    cfg.validate()
    return cfg


def main(argv=None, environ=None) -> int:
    parser = _parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    try:
        cfg = build_config(ns, environ)
        if ns.command == "verify":
            return run(cfg)
        text = render_series(emit_series(ns.name, cfg), ns.emit_format)
        if ns.output:
            with open(ns.output, "w", encoding="utf-8") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)
            sys.stdout.flush()
        return 0
    except BrokenPipeError:
        # reader went away (e.g. piped into head); not an error of ours
        os.dup2(os.open(os.devnull, os.O_WRONLY), sys.stdout.fileno())
        return 0
    except UsageError as exc:
        print(f"moyalgrav: error: {exc}", file=sys.stderr)
        return 2
    except TruncationTooSmall as exc:
        print(f"moyalgrav: truncation too small: {exc}", file=sys.stderr)
        return 2
