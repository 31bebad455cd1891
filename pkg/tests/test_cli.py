import csv
import json

import pytest

from afba import cli
from afba.problems import gen_lasso, gen_strongly_convex_qp, problem_file
from afba.report import TRACE_HEADER


def _write(tmp_path, doc, name="problem.json"):
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    return str(path)


@pytest.fixture(scope="module")
def qp():
    return gen_strongly_convex_qp(0)


def _cv(qp, **run):
    g = 0.9 / qp.payload.norm_L
    return problem_file(qp, {"name": "condat_vu", "gamma1": g, "gamma2": g, "lam": 1.0},
                        run={"max_iter": 20_000, "tol": 1e-10, **run})


def test_validate_ok(tmp_path, qp, capsys):
    assert cli.main(["validate", _write(tmp_path, _cv(qp))]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["valid"] and "delta" in out


def test_validate_rejects_large_dual_step(tmp_path, qp, capsys):
    nL = qp.payload.norm_L
    doc = problem_file(qp, {"name": "condat_vu", "gamma1": 1.0 / nL, "gamma2": 2.0 / nL, "lam": 1.0})
    assert cli.main(["validate", _write(tmp_path, doc)]) == 2
    out = json.loads(capsys.readouterr().out)
    names = [q["name"] for q in out["inequalities"] if not q["holds"]]
    assert "gamma1_inv_minus_gamma2_L2" in names


def test_malformed_json(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text("{not json")
    assert cli.main(["validate", str(path)]) == 3
    assert cli.main(["solve", str(path)]) == 3


def test_schema_violation_points_at_key(tmp_path, qp, capsys):
    doc = _cv(qp)
    doc["surprise"] = 1
    assert cli.main(["validate", _write(tmp_path, doc)]) == 3
    out = json.loads(capsys.readouterr().out)
    assert not out["valid"]


def test_unknown_variant(tmp_path, qp, capsys):
    doc = _cv(qp)
    doc["variant"]["name"] = "nesterov"
    assert cli.main(["validate", _write(tmp_path, doc)]) == 3


def test_solve_converges_on_lasso(tmp_path):
    inst = gen_lasso(0, 30, 40, formulation="pd")
    p = inst.payload
    g = 0.9 / p.norm_L
    doc = problem_file(inst, {"name": "condat_vu", "gamma1": g, "gamma2": g, "lam": 1.0},
                       run={"max_iter": 50_000, "tol": 1e-9})
    trace, report = tmp_path / "t.csv", tmp_path / "r.json"
    code = cli.main(["solve", _write(tmp_path, doc), "--trace", str(trace), "--report", str(report)])
    assert code == 0
    rows = list(csv.reader(trace.open()))
    assert rows[0] == list(TRACE_HEADER)
    assert rows[0] == "n,lambda,alpha,res_P,res_D,fejer,objective".split(",")
    assert float(rows[-1][3]) <= 1e-9
    assert len({len(r) for r in rows}) == 1
    rep = json.loads(report.read_text())
    assert rep["schema"] == 1 and rep["status"] == "converged" and rep["diagnostics"]["fejer"]["holds"]


def test_zero_tolerance_exhausts_budget(tmp_path, qp):
    doc = _cv(qp, max_iter=50, tol=0.0)
    doc.pop("oracle")
    trace = tmp_path / "t.csv"
    assert cli.main(["solve", _write(tmp_path, doc), "--trace", str(trace)]) == 1
    rows = list(csv.reader(trace.open()))
    # one row per performed step
    assert len(rows) == 1 + 50
    # no oracle: the column stays, empty
    assert all(r[5] == "" for r in rows[1:])


def test_thinning_keeps_first_and_last(tmp_path, qp):
    doc = _cv(qp, max_iter=50, tol=0.0, every_k=7)
    trace = tmp_path / "t.csv"
    cli.main(["solve", _write(tmp_path, doc), "--trace", str(trace)])
    ns = [int(r[0]) for r in list(csv.reader(trace.open()))[1:]]
    assert ns[0] == 0 and ns[-1] == 49 and ns[1] == 7


def test_numeric_failure_exit(tmp_path, qp):
    doc = problem_file(qp, {"name": "bac", "gamma1": 50.0, "gamma2": 50.0}, run={"max_iter": 10_000})
    report = tmp_path / "r.json"
    assert cli.main(["solve", _write(tmp_path, doc), "--skip-validation", "--report", str(report)]) == 4
    rep = json.loads(report.read_text())
    assert rep["status"] == "numeric_failure" and rep["last_good"] is not None
    # without the override the same file is rejected up front
    assert cli.main(["solve", _write(tmp_path, doc), "--report", str(report)]) == 2


def test_report_config_round_trip(tmp_path, qp):
    doc = _cv(qp, max_iter=300)
    t1, t2, r1 = tmp_path / "a.csv", tmp_path / "b.csv", tmp_path / "r.json"
    cli.main(["solve", _write(tmp_path, doc), "--trace", str(t1), "--report", str(r1), "--seed", "3"])
    echoed = json.loads(r1.read_text())["config"]
    cli.main(["solve", _write(tmp_path, echoed, "echo.json"), "--trace", str(t2)])
    assert t1.read_bytes() == t2.read_bytes()


def test_compare_three_variants(tmp_path, qp):
    out = tmp_path / "table.json"
    code = cli.main(["compare", _write(tmp_path, _cv(qp)), "--variants", "dst,condat_vu,bac", "--out", str(out)])
    assert code == 0
    rows = json.loads(out.read_text())["rows"]
    assert [r["variant"] for r in rows] == ["bac", "condat_vu", "dst"]
    assert all(r["status"] == "converged" for r in rows)
    assert all("q_factor" in r["rate_fit"] for r in rows)


def test_compare_skips_invalid_variant(tmp_path):
    inst = gen_strongly_convex_qp(1, with_h=True)
    g = 0.5 / inst.payload.norm_L
    doc = problem_file(inst, {"name": "condat_vu", "gamma1": g, "gamma2": g, "lam": 0.5})
    out = tmp_path / "table.json"
    assert cli.main(["compare", _write(tmp_path, doc), "--variants", "mu0,dst", "--out", str(out)]) == 0
    rows = {r["variant"]: r for r in json.loads(out.read_text())["rows"]}
    assert rows["mu0"]["status"] == "skipped: mu0_structure"
    assert rows["dst"]["status"] == "converged"


def test_compare_empty_list(tmp_path, qp):
    assert cli.main(["compare", _write(tmp_path, _cv(qp)), "--variants", ""]) == 3


def test_bad_arguments():
    assert cli.main(["frobnicate"]) == 3
