"""Command-line front end.

::

    afba validate PROBLEM.json
    afba solve PROBLEM.json [--trace out.csv] [--report out.json] [--seed K]
    afba compare PROBLEM.json --variants condat_vu,bac,dst [--out table.json]

Exit codes: 0 converged, 1 iteration budget exhausted, 2 invalid
parameters, 3 bad input, 4 numerical failure.
"""
from __future__ import annotations

import argparse
import copy
import csv
import io
import json
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from importlib import resources

import jsonschema
import numpy as np

from .diagnostics import linear_rate_fit, report_verdicts
from .errors import DimensionMismatch, InvalidParameters, InvariantViolation, NumericalFailure
from .primal_dual import SaddleProblem
from .report import TRACE_HEADER
from .variants import BUILDERS, PD_VARIANTS, DRProblem, build_dr_forward, build_drs_classic, default_params

__all__ = ["main", "load_problem", "build_solver", "write_trace", "EXIT"]

EXIT = {"converged": 0, "budget": 1, "invalid": 2, "bad_input": 3, "numeric": 4}

REPORT_SCHEMA_VERSION = 1

RUN_DEFAULTS = {"max_iter": 10_000, "tol": 1e-10, "tol_rel": 0.0, "every_k": 1}

# parameters each file-level variant accepts, with defaults (None = required)
VARIANT_PARAMS = {
    "primal_dual": {"gamma1": None, "gamma2": None, "theta": None, "mu": 1.0, "lam": 1.0},
    "condat_vu": {"gamma1": None, "gamma2": None, "lam": 1.0},
    "bac": {"gamma1": None, "gamma2": None},
    "dst": {"gamma1": None, "gamma2": None},
    "mu0": {"gamma1": None, "gamma2": None, "theta": None},
    "dr_forward": {"gamma": None, "theta": None, "rho": 1.0},
    "drs_classic": {"gamma": None, "rho": 1.0},
}


class BadInput(Exception):
    """The problem file cannot be used; carries a JSON pointer when known."""

    def __init__(self, message, pointer=""):
        super().__init__(message)
        self.pointer = pointer


def _schema():
    text = resources.files("afba").joinpath("schema/problem.json").read_text()
    return json.loads(text)


def _pointer(path) -> str:
    return "/" + "/".join(str(p) for p in path) if path else ""


def load_problem(path: str) -> dict:
    """Read and schema-validate a problem file."""
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise BadInput(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise BadInput(f"malformed JSON: {exc}") from exc
    validator = jsonschema.Draft202012Validator(_schema())
    errors = sorted(validator.iter_errors(doc), key=lambda e: list(e.absolute_path))
    if errors:
        e = errors[0]
        raise BadInput(f"schema violation: {e.message}", _pointer(e.absolute_path))
    return doc


def saddle_from_doc(doc: dict, seed: int) -> SaddleProblem:
    try:
        return SaddleProblem.from_dict(doc, seed=seed)
    except (DimensionMismatch, ValueError, KeyError, TypeError) as exc:
        raise BadInput(f"cannot build the problem: {exc}") from exc


def _variant_args(doc: dict) -> tuple[str, dict]:
    v = dict(doc["variant"])
    name = v.pop("name")
    if name not in VARIANT_PARAMS:
        if name in BUILDERS:
            raise BadInput(f"variant {name!r} cannot be configured from a problem file", "/variant/name")
        raise BadInput(f"unknown variant {name!r}", "/variant/name")
    allowed = VARIANT_PARAMS[name]
    extra = sorted(set(v) - set(allowed))
    if extra:
        raise BadInput(f"variant {name!r} does not take {', '.join(extra)}", f"/variant/{extra[0]}")
    args = {}
    for k, default in allowed.items():
        if k in v:
            args[k] = float(v[k])
        elif default is None:
            raise BadInput(f"variant {name!r} needs {k!r}", "/variant")
        else:
            args[k] = default
    return name, args


def build_solver(doc: dict, seed: int, name: str | None = None, args: dict | None = None):
    """Solver for ``doc``; raises :class:`InvalidParameters` or :class:`BadInput`."""
    problem = saddle_from_doc(doc, seed)
    if name is None:
        name, args = _variant_args(doc)
    if name in ("dr_forward", "drs_classic"):
        if problem.n != problem.m or not np.array_equal(problem.Ld, np.eye(problem.n)):
            raise BadInput(f"{name} needs L equal to the identity", "/operator/L")
        if problem.l_mu is not None:
            raise BadInput(f"{name} needs l to be the indicator of {{0}}", "/atoms/l")
        dr = DRProblem(problem.f, problem.g, problem.h, problem.n)
        if name == "dr_forward":
            return build_dr_forward(dr, **args)
        return build_drs_classic(dr, **args)
    return BUILDERS[name](problem, **args)


def _run_opts(doc):
    r = dict(RUN_DEFAULTS)
    r.update(doc.get("run", {}))
    return r


def _z_star(doc):
    o = doc.get("oracle")
    if o is None:
        return None
    return np.concatenate([np.asarray(o["x"], dtype=float), np.asarray(o["y"], dtype=float)])


def _fmt(v) -> str:
    if v is None:
        return ""
    return format(float(v), ".17g")


def write_trace(report, fh, every_k: int = 1):
    """Write the CSV trace; missing columns are empty strings."""
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(TRACE_HEADER)
    for row in report.rows(every_k):
        w.writerow([row[0]] + [_fmt(v) for v in row[1:]])


def _seed(doc, cli_seed):
    return int(cli_seed if cli_seed is not None else doc.get("seed", 0))


def _emit(obj, path=None):
    text = json.dumps(obj, indent=2, sort_keys=False)
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def cmd_validate(ns) -> int:
    try:
        doc = load_problem(ns.path)
        solver = build_solver(doc, _seed(doc, ns.seed))
    except BadInput as exc:
        _emit({"valid": False, "error": str(exc), "pointer": exc.pointer})
        return EXIT["bad_input"]
    except InvalidParameters as exc:
        _emit(exc.to_dict())
        return EXIT["invalid"]
    _emit(solver.certificate.to_dict())
    return EXIT["converged"]


def _solve(solver, doc, opts, z_star):
    kw = dict(max_iter=int(opts["max_iter"]), tol_abs=float(opts["tol"]), tol_rel=float(opts["tol_rel"]),
              z_star=z_star, objective=True)
    return solver.run(**kw)


def cmd_solve(ns) -> int:
    t0 = time.perf_counter()
    try:
        doc = load_problem(ns.path)
        seed = _seed(doc, ns.seed)
        doc = copy.deepcopy(doc)
        doc["seed"] = seed
        if ns.skip_validation:
            solver = _unchecked_solver(doc, seed)
        else:
            solver = build_solver(doc, seed)
    except BadInput as exc:
        _emit({"schema": REPORT_SCHEMA_VERSION, "status": "bad_input", "exit_code": EXIT["bad_input"],
               "error": str(exc), "pointer": exc.pointer}, ns.report)
        print(f"error: {exc} {exc.pointer}".rstrip(), file=sys.stderr)
        return EXIT["bad_input"]
    except InvalidParameters as exc:
        _emit({"schema": REPORT_SCHEMA_VERSION, "status": "invalid", "exit_code": EXIT["invalid"],
               "certificate": exc.to_dict()}, ns.report)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT["invalid"]
    t1 = time.perf_counter()
    opts = _run_opts(doc)
    z_star = _z_star(doc)
    if z_star is not None and z_star.shape != (doc["space"]["n"] + doc["space"]["m"],):
        print("error: oracle has the wrong length", file=sys.stderr)
        return EXIT["bad_input"]
    try:
        rep = _solve(solver, doc, opts, z_star)
    except (NumericalFailure, InvariantViolation) as exc:
        last = getattr(exc, "last_good", None)
        out = {"schema": REPORT_SCHEMA_VERSION, "status": "numeric_failure", "exit_code": EXIT["numeric"],
               "config": doc, "error": str(exc), "iteration": getattr(exc, "iteration", None),
               "last_good": None if last is None else np.asarray(last).tolist()}
        _emit(out, ns.report)
        if ns.trace:
            with open(ns.trace, "w", encoding="utf-8", newline="") as fh:
                csv.writer(fh, lineterminator="\n").writerow(TRACE_HEADER)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT["numeric"]
    t2 = time.perf_counter()
    verdicts = report_verdicts(rep, solver.certificate)
    t3 = time.perf_counter()
    code = EXIT["converged"] if rep.converged else EXIT["budget"]
    if ns.trace:
        with open(ns.trace, "w", encoding="utf-8", newline="") as fh:
            write_trace(rep, fh, int(opts["every_k"]))
    out = {
        "schema": REPORT_SCHEMA_VERSION,
        "status": rep.status,
        "exit_code": code,
        "config": doc,
        "certificate": solver.certificate.to_dict(),
        "summary": rep.summary(),
        "solution": {"x": rep.x.tolist(), "y": rep.y.tolist()},
        "diagnostics": verdicts,
        "timings": {"setup_s": t1 - t0, "solve_s": t2 - t1, "diagnostics_s": t3 - t2},
    }
    if ns.report:
        _emit(out, ns.report)
    elif not ns.trace:
        _emit(out)
    return code


def _unchecked_solver(doc, seed):
    """Build a solver while bypassing the validity checks (for experiments)."""
    from .primal_dual import PDParams
    from .variants import PDSolver, VariantSpec
    from .validity import Certificate

    name, args = _variant_args(doc)
    try:
        return build_solver(doc, seed, name, args)
    except InvalidParameters as exc:
        if name not in PD_VARIANTS or name in ("dr_forward", "drs_classic"):
            raise
        problem = saddle_from_doc(doc, seed)
        theta = {"condat_vu": 2.0, "bac": 0.0, "dst": 1.0}.get(name, args.get("theta", 1.0))
        mu = {"condat_vu": 1.0, "bac": 0.5, "dst": 1.0, "mu0": 0.0}.get(name, args.get("mu", 1.0))
        params = PDParams(args["gamma1"], args["gamma2"], theta, mu)
        cert = Certificate(name, "unchecked", None, None, 2.0, (0.0, 2.0), exc.inequalities,
                           extras={"unchecked": True})
        fixed = name in ("bac", "dst", "mu0")
        spec = VariantSpec(name, dict(args), theta, mu, "alpha_one" if fixed else "constant", cert)
        return PDSolver(problem, params, spec, args.get("lam", 1.0), fixed_alpha=fixed)


def _compare_one(doc, seed, name, opts, z_star):
    row = {"variant": name}
    if name not in VARIANT_PARAMS:
        row["status"] = "skipped: not configurable from a problem file"
        return row
    try:
        problem = saddle_from_doc(doc, seed)
        params = default_params(name, problem)
        params.pop("_rejected", None)
        solver = build_solver(doc, seed, name, params)
    except InvalidParameters as exc:
        failed = exc.failed_names
        row["status"] = f"skipped: {failed[0] if failed else str(exc)}"
        return row
    except BadInput as exc:
        row["status"] = f"skipped: {exc}"
        return row
    row["params"] = params
    t = time.perf_counter()
    try:
        rep = _solve(solver, doc, opts, z_star)
    except (NumericalFailure, InvariantViolation) as exc:
        row["status"] = f"numeric_failure: {exc}"
        return row
    row["time_s"] = time.perf_counter() - t
    row["status"] = rep.status
    row["iterations"] = rep.iterations
    row.update({k: v for k, v in rep.summary().items() if k.startswith("final_")})
    series = rep.fejer if rep.fejer is not None else rep.res_P
    fit = linear_rate_fit(series)
    row["rate_fit"] = {"series": "fejer" if rep.fejer is not None else "res_P", **fit.to_dict()["details"]}
    return row


def cmd_compare(ns) -> int:
    names = [v.strip() for v in (ns.variants or "").split(",") if v.strip()]
    if not names:
        print("error: empty variant list", file=sys.stderr)
        return EXIT["bad_input"]
    try:
        doc = load_problem(ns.path)
        saddle_from_doc(doc, _seed(doc, ns.seed))
    except BadInput as exc:
        print(f"error: {exc} {exc.pointer}".rstrip(), file=sys.stderr)
        return EXIT["bad_input"]
    seed = _seed(doc, ns.seed)
    opts = _run_opts(doc)
    z_star = _z_star(doc)
    with ThreadPoolExecutor(max_workers=min(4, len(names))) as pool:
        rows = list(pool.map(lambda n: _compare_one(doc, seed, n, opts, z_star), names))
    rows.sort(key=lambda r: r["variant"])
    out = {"schema": REPORT_SCHEMA_VERSION, "seed": seed, "rows": rows}
    _emit(out, ns.out)
    if ns.out:
        buf = io.StringIO()
        for r in rows:
            buf.write(f"{r['variant']:<12} {r['status']:<40} {r.get('iterations', '')}\n")
        sys.stdout.write(buf.getvalue())
    return EXIT["converged"]


def make_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="afba", description="Operator-splitting solvers with validity certificates.")
    sub = p.add_subparsers(dest="command", required=True)

    v = sub.add_parser("validate", help="check the variant's parameter conditions")
    v.add_argument("path")
    v.add_argument("--seed", type=int, default=None)
    v.set_defaults(func=cmd_validate)

    s = sub.add_parser("solve", help="run a variant and write its trace and report")
    s.add_argument("path")
    s.add_argument("--trace", help="CSV trace output")
    s.add_argument("--report", help="JSON report output")
    s.add_argument("--seed", type=int, default=None)
    s.add_argument("--skip-validation", action="store_true",
                   help="run primal-dual variants even when their conditions fail")
    s.set_defaults(func=cmd_solve)

    c = sub.add_parser("compare", help="run several variants with their default parameters")
    c.add_argument("path")
    c.add_argument("--variants", default="", help="comma-separated variant names")
    c.add_argument("--out", help="JSON table output")
    c.add_argument("--seed", type=int, default=None)
    c.set_defaults(func=cmd_compare)
    return p


def main(argv=None) -> int:
    parser = make_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT["bad_input"] if exc.code else 0
    return ns.func(ns)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
