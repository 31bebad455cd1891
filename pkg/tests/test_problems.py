import numpy as np
import pytest

from afba.problems import (OracleError, ProblemInstance, gen_admm3, gen_dr_pair, gen_lasso, gen_strongly_convex_qp,
                           problem_file)


def test_lasso_large_regularisation_gives_zero():
    inst = gen_lasso(0, 20, 30)
    A = inst.payload.h.params["A"]
    b = inst.payload.h.params["b"]
    top = float(np.max(np.abs(A.T @ b)))
    for reg in (1.01 * top, 1e3 * top):
        big = gen_lasso(0, 20, 30, reg=reg)
        assert np.array_equal(big.oracle["x"], np.zeros(30))


def test_lasso_optimality():
    inst = gen_lasso(2, 30, 40, formulation="pd")
    x = inst.oracle["x"]
    A = inst.payload.Ld
    b = -inst.payload.g.q
    g = A.T @ (A @ x - b)
    reg = inst.extras["reg"]
    assert np.all(np.abs(g) <= reg * (1 + 1e-8))
    on = x != 0
    assert np.allclose(g[on], -reg * np.sign(x[on]), atol=1e-8)


@pytest.mark.parametrize("gen", [lambda s: gen_strongly_convex_qp(s), lambda s: gen_lasso(s, 20, 30),
                                 lambda s: gen_admm3(s), lambda s: gen_dr_pair(s)])
def test_seed_stable(gen):
    a, b = gen(9), gen(9)
    assert np.array_equal(a.z_star, b.z_star)
    assert a.to_dict() == b.to_dict()
    assert not np.array_equal(a.z_star, gen(10).z_star)


def test_qp_oracle_rows():
    inst = gen_strongly_convex_qp(1)
    pb = inst.payload
    x = inst.oracle["x"]
    assert np.allclose(pb.Ld @ x, pb.g.b, atol=1e-12)
    assert max(inst.residuals().values()) <= 1e-10


def test_perturbed_dual_breaks_residual():
    inst = gen_strongly_convex_qp(2)
    x, y = inst.oracle["x"], inst.oracle["y"].copy()
    y[0] += 1e-3
    rx, _ = inst.payload.residual(x, y)
    assert rx > 1e-5
    bad = ProblemInstance(inst.kind, inst.payload, inst.seed, inst.dims, {"x": x, "y": y})
    with pytest.raises(OracleError):
        bad.verify()


def test_admm_fixture():
    inst = gen_admm3(0)
    p = inst.payload
    o = inst.oracle
    assert p.constraint_residual([o["x1"], o["x2"], o["x3"]]) <= 1e-12
    assert inst.extras["xi"] == pytest.approx(np.linalg.eigvalsh(p.f[0].Q)[0])
    zero = gen_admm3(0, zero_f23=True)
    assert zero.payload.f[1].kind == "zero" and zero.payload.f[2].kind == "zero"


def test_dr_fixture():
    inst = gen_dr_pair(0)
    F = inst.payload.F
    A = F.params["A"]
    assert inst.payload.eta == pytest.approx(1.0 / np.linalg.norm(A, 2) ** 2)
    assert max(inst.residuals().values()) <= 1e-9
    assert gen_dr_pair(0, with_forward=False).payload.F is None


@pytest.mark.parametrize("gen", [lambda: gen_strongly_convex_qp(3, with_h=True), lambda: gen_lasso(3, 20, 30),
                                 lambda: gen_admm3(3), lambda: gen_dr_pair(3)])
def test_dict_round_trip(gen):
    inst = gen()
    back = ProblemInstance.from_dict(inst.to_dict())
    assert back.kind == inst.kind
    assert np.array_equal(back.z_star, inst.z_star)
    assert back.residuals() == pytest.approx(inst.residuals(), abs=1e-12)


def test_problem_file_only_for_saddle():
    with pytest.raises(ValueError):
        problem_file(gen_admm3(0), {"name": "condat_vu"})
