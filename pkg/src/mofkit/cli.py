"""Command line interface: ``mofkit <command> --scenario file.json``."""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from . import algebra as alg
from . import continuous as cf
from . import instances
from . import lipschitz as lp
from . import mof as mf
from . import probmetric as pm
from . import scenario as sc
from .errors import MofkitError

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_FAIL = 2
REPORT_SCHEMA = "1.0"


class _Parser(argparse.ArgumentParser):
    """Usage errors are input errors (exit 1); exit 2 is reserved for failed checks."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


class Checks:
    def __init__(self):
        self.items = []

    def add(self, name: str, passed: bool, **info):
        self.items.append({"name": name, "passed": bool(passed), **info})

    def add_report(self, prefix: str, report):
        for c in report.checks:
            self.add(f"{prefix}: {c.name}", c.passed, worst=c.worst,
                     where=None if c.where is None else [str(p) for p in c.where])

    @property
    def passed(self) -> bool:
        return all(c["passed"] for c in self.items)


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------


def _seed(args, scen) -> int:
    if args.seed is not None:
        return args.seed
    return scen.seed if scen.seed is not None else 0


def _selected_fields(args, scen) -> dict:
    names = getattr(args, "field", None) or list(scen.fields)
    missing = [n for n in names if n not in scen.fields]
    if missing:
        raise sc.StructureViolation(f"scenario has no field named {missing[0]!r}")
    return {n: scen.fields[n] for n in names}


def _table(t: mf.MetricTable) -> list:
    return [[float(v) for v in row] for row in t.values]


def cmd_validate(args, scen, checks: Checks) -> dict:
    m = scen.mof
    report = mf.verify_mof(m, jobs=args.jobs)
    checks.add_report("mof", report)
    out = {"mof_axioms": report.to_dict()}
    try:
        dmu = mf.induced_metric_states(m)
        checks.add("D^mu is a metric", True)
    except MofkitError as exc:
        checks.add("D^mu is a metric", False, error=str(exc))
        dmu = mf.induced_metric_states(m, check=False)
    dn = mf.induced_metric_norm(m, check=False)
    excess = float(np.max(dmu.values - dn.values))
    checks.add("D^mu <= D^norm", excess <= m.tol.struct * m.scale(), worst=max(excess, 0.0))
    out["D_mu"] = _table(dmu)
    out["D_norm"] = _table(dn)
    try:
        p = pm.prob_metric(m, jobs=args.jobs)
        pr = pm.verify_pm(p)
        checks.add_report("probabilistic metric", pr)
        out["prob_metric_axioms"] = pr.to_dict()
    except MofkitError as exc:
        checks.add("probabilistic metric", False, error=str(exc))
    return out


def _mof_gate(args, scen, checks: Checks) -> bool:
    report = mf.verify_mof(scen.mof, jobs=args.jobs)
    checks.add_report("mof", report)
    return report.passed


def cmd_lipnorm(args, scen, checks: Checks) -> dict:
    if not _mof_gate(args, scen, checks):
        return {}
    m = scen.mof
    out = {}
    for name, f in _selected_fields(args, scen).items():
        rep = lp.lip_seminorm(f)
        entry = {"lip": rep.to_dict(), "membership": lp.membership(f, report=rep).to_dict()}
        if rep.commutes_with_D:
            ordered = lp.lip_seminorm_ordered(f)
            entry["ordered_seminorm"] = ordered
            checks.add(f"{name}: order form agrees", abs(ordered - rep.seminorm) <= m.tol.eq * max(1.0, rep.seminorm),
                       worst=abs(ordered - rep.seminorm))
        out[name] = entry
    if m.is_central() and len(m.points) >= 2:
        _, rep = lp.field_D_on_product(m)
        value = rep.seminorm
        checks.add("D as a field on D x D has seminorm <= 1", value <= 1.0 + m.tol.eq, worst=value)
        out["D_on_product"] = {"seminorm": value, "below_one": value < 1.0 - m.tol.eq}
    return out


def cmd_probmetric(args, scen, checks: Checks) -> dict:
    p = pm.prob_metric(scen.mof, jobs=args.jobs)
    pr = pm.verify_pm(p)
    checks.add_report("probabilistic metric", pr)
    return {"table": p.to_dict()["pairs"], "axioms": pr.to_dict()}


def _field_suite(m: mf.MofSpace, named: dict, seed: int, n_random: int) -> list:
    rng = np.random.default_rng(seed)
    bases = lp.commutant_bases(m)
    return list(named.values()) + [lp.random_commuting_field(m, rng, bases=bases) for _ in range(n_random)]


def cmd_deleeuw(args, scen, checks: Checks) -> dict:
    if not _mof_gate(args, scen, checks):
        return {}
    m = scen.mof
    named = _selected_fields(args, scen)
    out = {"fields": {}}
    for name, f in named.items():
        phi = lp.de_leeuw(f)
        seminorm = lp.lip_seminorm(f).seminorm
        gap = abs(phi.sup_norm() - seminorm)
        checks.add(f"{name}: ||Phi(f)||_inf = ||f||_D", gap <= 1e-10 * max(1.0, seminorm), worst=gap)
        out["fields"][name] = {
            "seminorm": seminorm,
            "phi": [{"pair": [str(x), str(y)], "matrix": sc.encode_matrix(v.matrix)}
                    for (x, y), v in phi.values.items()],
        }
    suite = [f for f in _field_suite(m, named, _seed(args, scen), args.samples) if lp.commutes_with_D(f)]
    residuals = []
    for f, g in zip(suite, suite[1:] + suite[:1]):
        scale = max(1.0, f.sup_norm() * g.sup_norm()) * max(1.0, max(lp.lip_seminorm(f).seminorm,
                                                                      lp.lip_seminorm(g).seminorm))
        residuals.append(lp.derivation_residual(f, g) / scale)
    worst = max(residuals, default=0.0)
    checks.add("derivation identity", worst <= m.tol.eq, worst=worst, count=len(residuals))
    inner = lp.inner_witness_check(m, _field_suite(m, named, _seed(args, scen), args.samples))
    checks.add("inner witness D^-1", inner.passed, worst=inner.worst, excluded=list(inner.excluded))
    out["derivation_residuals"] = residuals
    out["inner_witness"] = inner.to_dict()
    return out


def _default_generators(m: mf.MofSpace, named: dict) -> list:
    gens = cf.all_scalar_fields(m)
    for x in m.points:
        for b in range(len(alg.block_structure(m.bundle[x]).blocks)):
            f = lp.distance_field(m, x, alg.State.block(m.bundle[x], b), check=False)
            if lp.commutes_with_D(f):
                gens.append(f)
    gens.extend(f for f in named.values() if lp.commutes_with_D(f))
    return gens


def cmd_dixmier(args, scen, checks: Checks) -> dict:
    if not _mof_gate(args, scen, checks):
        return {}
    m = scen.mof
    named = _selected_fields(args, scen)
    gens = _default_generators(m, named)
    cover = scen.covers[0] if scen.covers else None
    if args.radius is not None:
        cover = cf.ball_cover(m, args.radius)
    probes = list(named.values()) or None
    probe = cf.dixmier_probe(gens, m, args.epsilon, probes, cover, args.max_word)
    checks.add("unit belongs to the algebra", probe.unit_axiom)
    checks.add("norm functions are continuous", probe.norm_axiom, worst=probe.worst_norm_excess)
    checks.add("local approximation implies membership", probe.local_axiom)
    out = {"probe": probe.to_dict()}
    if m.is_central() and not m.is_scalar_valued():
        cert = cf.nontriviality_certificate(m)
        checks.add("non-scalar continuous field exists", cert.member, distance=cert.distance_to_scalars)
        out["certificate"] = cert.to_dict()
    return out


# ---------------------------------------------------------------------------
# Example generation
# ---------------------------------------------------------------------------


def _quotient_fields(model: mf.QuotientModel, m: mf.MofSpace, rng) -> dict:
    fields = {"glued_random": lp.OperatorField(m, model.field_values(rng.normal(size=len(model.Y))))}
    fields["glued_distance"] = lp.OperatorField(m, model.field_values(model.rho[model.classes[-1][0]]))
    return fields


def example_document(kind: str, args) -> dict:
    seed = 0 if args.seed is None else args.seed
    rng = np.random.default_rng(seed)
    if kind == "quotient":
        if args.preset == "e2":
            model = instances.e2_model()
            m = model.mof()
            fields = {"identity": lp.OperatorField(m, model.field_values(lambda y: float(y)))}
            params = {"preset": "e2"}
        else:
            model = instances.random_quotient_model(rng, args.size, args.classes, mixed=not args.commutative)
            m = model.mof()
            fields = _quotient_fields(model, m, rng)
            params = {"size": args.size, "classes": args.classes, "commutative": args.commutative}
    elif kind == "staircase":
        model = mf.staircase_model(args.n, args.mesh)
        m = model.mof()
        fields = _quotient_fields(model, m, rng)
        params = {"n": args.n, "mesh": args.mesh}
    else:
        m = instances.random_scalar_mof(rng, args.size)
        fields = {"random": lp.random_field(m, rng), "normal": lp.random_normal_field(m, rng)}
        params = {"size": args.size}
    fields["random_commuting"] = lp.random_commuting_field(m, rng)
    return sc.scenario_to_dict(m, fields, seed=seed, meta={"generator": kind, "params": params})


# ---------------------------------------------------------------------------
# Driver
# ---------------------------------------------------------------------------


COMMANDS = {
    "validate": cmd_validate,
    "lipnorm": cmd_lipnorm,
    "probmetric": cmd_probmetric,
    "deleeuw": cmd_deleeuw,
    "dixmier": cmd_dixmier,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--scenario", type=Path, help="scenario JSON file")
    common.add_argument("--report", choices=("json", "text"), default="text")
    common.add_argument("--tol", type=float, default=None, help="override the equality tolerance")
    common.add_argument("--jobs", type=int, default=1, help="worker threads for verification loops")
    common.add_argument("--seed", type=int, default=None)
    common.add_argument("--out", type=Path, default=None, help="write the report (or example) here")

    parser = _Parser(prog="mofkit", description=__doc__)
    parser.add_argument("--version", action="version", version=f"mofkit {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    sub.add_parser("validate", parents=[common], help="mof axioms, induced metrics, probabilistic metric")
    p = sub.add_parser("lipnorm", parents=[common], help="Lipschitz seminorms of the scenario fields")
    p.add_argument("--field", action="append", help="restrict to this field (repeatable)")
    sub.add_parser("probmetric", parents=[common], help="spectral-measure table")
    p = sub.add_parser("deleeuw", parents=[common], help="de Leeuw map and its identities")
    p.add_argument("--field", action="append")
    p.add_argument("--samples", type=int, default=10, help="extra random commuting fields")
    p = sub.add_parser("dixmier", parents=[common], help="continuous-field probe")
    p.add_argument("--field", action="append")
    p.add_argument("--epsilon", type=float, default=1e-8)
    p.add_argument("--radius", type=float, default=None, help="ball cover radius in D^norm")
    p.add_argument("--max-word", type=int, default=3)
    p = sub.add_parser("example", parents=[common], help="write a generated scenario")
    p.add_argument("kind", choices=("quotient", "staircase", "scalar"))
    p.add_argument("--preset", choices=("e2",), default=None)
    p.add_argument("--size", type=int, default=4)
    p.add_argument("--classes", type=int, default=2)
    p.add_argument("--commutative", action="store_true")
    p.add_argument("--n", type=int, default=3)
    p.add_argument("--mesh", type=int, default=2)
    return parser


def render_text(report: dict) -> str:
    lines = [f"mofkit {report['version']} {report['command']}  input {report['input_digest']}"]
    for c in report["checks"]:
        extra = ""
        if c.get("worst") is not None:
            extra += f" worst={c['worst']:.3e}"
        if c.get("where"):
            extra += f" at {tuple(c['where'])}"
        if c.get("error"):
            extra += f" ({c['error']})"
        lines.append(f"[{'PASS' if c['passed'] else 'FAIL'}] {c['name']}{extra}")
    lines.append("PASSED" if report["passed"] else "FAILED")
    return "\n".join(lines) + "\n"


def _emit(args, text: str):
    if args.out is not None:
        args.out.write_text(text)
    else:
        sys.stdout.write(text)


def _error(exc: Exception) -> int:
    diag = {"error": type(exc).__name__, "message": str(exc)}
    sys.stderr.write(json.dumps(diag) + "\n")
    return EXIT_INPUT


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    tol = alg.DEFAULT_TOL
    try:
        if args.tol is not None:
            tol = tol.with_overrides(eq=args.tol)
        if args.command == "example":
            _emit(args, sc.dumps(example_document(args.kind, args)))
            return EXIT_OK
        if args.scenario is None:
            raise sc.ParseError("--scenario is required")
        scen = sc.load_scenario(args.scenario, tol)
    except (MofkitError, ValueError) as exc:
        return _error(exc)

    checks = Checks()
    try:
        results = COMMANDS[args.command](args, scen, checks)
    except MofkitError as exc:
        if isinstance(exc, AssertionError):
            checks.add("theorem check", False, error=str(exc))
            results = {}
        else:
            return _error(exc)
    report = {
        "tool": "mofkit",
        "version": __version__,
        "report_schema": REPORT_SCHEMA,
        "command": args.command,
        "input_digest": scen.digest,
        "seed": _seed(args, scen),
        "tolerances": dataclasses.asdict(scen.mof.tol),
        "passed": checks.passed,
        "checks": checks.items,
        "results": results,
    }
    text = json.dumps(report, indent=1) + "\n" if args.report == "json" else render_text(report)
    _emit(args, text)
    return EXIT_OK if checks.passed else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
