import math

import numpy as np
import pytest
from hypothesis import assume, given, strategies as st

from afba import kernels
from afba.atoms import L1, Box, CocoMap, Point, Quadratic, Zero
from afba.engine import compute_delta
from afba.errors import InvalidParameters
from afba.primal_dual import (PDParams, SaddleProblem, alpha_pd, beta_of, build_S_family, pd_iterate, pd_matrices,
                              tau_of, validate)
from afba.problems import gen_strongly_convex_qp

import reference as ref

needs_compiled = pytest.mark.skipif("compiled" not in kernels.available_backends(),
                                    reason="compiled kernels not built")


def _unit_L(rng, m=3, n=4):
    L = rng.standard_normal((m, n))
    return L / np.linalg.norm(L, 2)


def _bare(L, h=None, l_mu=None, norm=1.0):
    m, n = L.shape
    return SaddleProblem(Zero(n), Zero(m), L, h=h, l_mu=l_mu, norm_L=norm)


# strong positivity constant

def test_tau_examples(rng):
    assert tau_of(PDParams(1, 1, 0), 1.0) == pytest.approx(1.0)
    assert tau_of(PDParams(1, 1, 2), 1.0) == pytest.approx(0.0, abs=1e-15)
    assert tau_of(PDParams(1, 1, 1), 1.0) == pytest.approx(0.5)
    L = _unit_L(rng)
    for theta, tau in ((2, 0.0), (1, 0.5)):
        P = pd_matrices(L, PDParams(1, 1, theta))["P"]
        assert np.linalg.eigvalsh(P)[0] == pytest.approx(tau, abs=1e-12)


@given(g1=st.floats(0.05, 5), g2=st.floats(0.05, 5), theta=st.floats(0, 3), seed=st.integers(0, 10 ** 6))
def test_tau_is_tight_lower_bound(g1, g2, theta, seed):
    rng = np.random.default_rng(seed)
    L = rng.standard_normal((3, 4))
    nL = float(np.linalg.norm(L, 2))
    p = PDParams(g1, g2, theta)
    assume(1 / g1 - g2 * theta ** 2 * nL ** 2 / 4 > 0)
    lo = float(np.linalg.eigvalsh(pd_matrices(L, p)["P"])[0])
    tau = tau_of(p, nL)
    assert lo - tau >= -1e-9 * max(1.0, 1 / g1, 1 / g2)
    # the bound is attained along the top singular pair
    assert lo - tau <= 1e-9 * max(1.0, 1 / g1, 1 / g2)


@given(g1=st.floats(0.05, 5), g2=st.floats(0.05, 5), theta=st.floats(0, 3), mu=st.floats(0, 1),
       seed=st.integers(0, 10 ** 6))
def test_metrics_positive_definite(g1, g2, theta, mu, seed):
    rng = np.random.default_rng(seed)
    L = rng.standard_normal((2, 3))
    nL = float(np.linalg.norm(L, 2))
    assume(1 / g1 - g2 * theta ** 2 * nL ** 2 / 4 > 1e-3 / g1)
    mats = pd_matrices(L, PDParams(g1, g2, theta, mu))
    for key in ("P", "S1", "S2", "D", "S"):
        assert np.linalg.eigvalsh(mats[key])[0] > 0, key


# cocoercivity constant and validation

def test_beta_examples(rng):
    L = _unit_L(rng)
    assert beta_of(_bare(L), PDParams(1, 1, 1)) is None
    pb = _bare(L, h=CocoMap.affine(np.eye(4)))
    assert beta_of(pb, PDParams(1, 0.5, 2)) == pytest.approx(0.5)
    pb = _bare(L, h=CocoMap.affine(np.eye(4)), l_mu=0.5)  # beta_l = 2
    beta = beta_of(pb, PDParams(1, 1, 1), tau=0.5)
    assert beta == pytest.approx(0.25)
    with pytest.raises(InvalidParameters):
        compute_delta(beta)


def test_beta_by_sampled_cocoercivity(rng):
    # C = (grad h, 0) is beta-cocoercive in the P metric
    L = _unit_L(rng)
    p = PDParams(1, 0.5, 2)
    pb = _bare(L, h=CocoMap.affine(np.eye(4)))
    beta = beta_of(pb, p)
    Pinv = np.linalg.inv(pd_matrices(L, p)["P"])
    for _ in range(500):
        d = rng.standard_normal(7)
        Cd = np.concatenate([d[:4], np.zeros(3)])
        assert Cd @ d >= beta * (Cd @ Pinv @ Cd) - 1e-12


def test_validate_examples(rng):
    L = _unit_L(rng)
    h = CocoMap.affine(np.eye(4))
    cert = validate(_bare(L, h=h), PDParams(1, 0.5, 2))
    assert cert.case == "ii" and cert.delta == pytest.approx(1.0)

    with pytest.raises(InvalidParameters) as exc:
        validate(_bare(L, h=h), PDParams(1, 1, 2))
    assert "cocoercivity_l_zero" in exc.value.failed_names
    cert = validate(_bare(L), PDParams(1, 1, 2))
    assert cert.case == "iv" and cert.positive_p and cert.delta == 2.0

    cert = validate(_bare(L), PDParams(1, 1, 1))
    assert cert.case == "iii" and cert.delta == 2.0
    gap = [q for q in cert.inequalities if q.name == "no_forward_positivity"][0]
    assert gap.lhs == pytest.approx(0.75)


def test_validate_checks_relaxation(rng):
    L = _unit_L(rng)
    pb = _bare(L, h=CocoMap.affine(np.eye(4)))
    validate(pb, PDParams(1, 0.5, 2), lam=0.99)
    with pytest.raises(InvalidParameters) as exc:
        validate(pb, PDParams(1, 0.5, 2), lam=1.0)
    assert "lambda_below_delta" in exc.value.failed_names


def test_certificate_is_reproducible(rng):
    L = _unit_L(rng)
    cert = validate(_bare(L, h=CocoMap.affine(np.eye(4)), l_mu=2.0), PDParams(0.5, 0.5, 1))
    for q in cert.selected:
        assert (q.lhs > q.rhs) if q.strict else (q.lhs >= q.rhs)
    assert cert.delta == pytest.approx(2 - 1 / (2 * cert.beta_P))
    d = cert.to_dict()
    assert d["valid"] and d["case"] == cert.case


# metrics and directions

@pytest.mark.parametrize("mu", [0.0, 0.3, 1.0])
@pytest.mark.parametrize("theta", [0.0, 1.0, 1.5])
def test_D_is_sandwich_of_S(rng, mu, theta):
    L = 0.5 * rng.standard_normal((3, 4))
    p = PDParams(0.7, 0.6, theta, mu)
    mats = pd_matrices(L, p)
    assert "S" in mats
    G = mats["H"] + mats["M"].T
    D = G.T @ np.linalg.solve(mats["S"], G)
    assert np.allclose(D, mats["D"], atol=1e-10 * np.abs(D).max())
    pre = build_S_family(L, p)
    zt = rng.standard_normal(7)
    assert np.allclose(pre.direction(zt), np.linalg.solve(mats["S"], G @ zt), atol=1e-10)


def test_theta_two_direction_is_identity(rng):
    L = _unit_L(rng)
    mats = pd_matrices(L, PDParams(0.5, 0.5, 2, 0.4))
    assert np.allclose(mats["H"] + mats["M"].T, mats["P"])
    pre = build_S_family(L, PDParams(0.5, 0.5, 2, 0.4))
    zt = rng.standard_normal(7)
    assert np.allclose(pre.direction(zt), zt)


def test_arrow_hurwicz_dual_direction(rng):
    L = _unit_L(rng)
    pre = build_S_family(L, PDParams(0.5, 0.5, 1, 1.0))
    zt = rng.standard_normal(7)
    assert np.array_equal(pre.direction(zt)[4:], zt[4:])


def test_alpha_examples(rng):
    L = rng.standard_normal((3, 4))
    xt, yt = rng.standard_normal(4), rng.standard_normal(3)
    assert alpha_pd(PDParams(0.3, 0.2, 2, 0.5), xt, yt, L, lam=1.3) == 1.3
    g1, g2 = 0.3, 0.2
    want = 0.7 * (xt @ xt / g1) / (xt @ xt / g1 + 2 * g2 * np.sum((L @ xt) ** 2))
    assert alpha_pd(PDParams(g1, g2, 0, 0), xt, np.zeros(3), L, lam=0.7) == pytest.approx(want)
    with pytest.raises(ValueError):
        alpha_pd(PDParams(g1, g2, 0, 0), np.zeros(4), np.zeros(3), L)


@given(theta=st.floats(0, 1.9), mu=st.floats(0, 1), seed=st.integers(0, 10 ** 6))
def test_alpha_matches_dense_norms(theta, mu, seed):
    rng = np.random.default_rng(seed)
    L = 0.3 * rng.standard_normal((3, 4))
    p = PDParams(0.8, 0.9, theta, mu)
    mats = pd_matrices(L, p)
    zt = rng.standard_normal(7)
    want = (zt @ mats["P"] @ zt) / (zt @ mats["D"] @ zt)
    assert alpha_pd(p, zt[:4], zt[4:], L) == pytest.approx(want, rel=1e-10)


# iteration

def test_zero_problem_stays_put(rng):
    pb = SaddleProblem(Zero(4), Zero(3), np.zeros((3, 4)))
    x0 = rng.standard_normal(4)
    rep = pd_iterate(pb, PDParams(1, 1, 1), x0, np.zeros(3))
    assert rep.iterations == 0 and np.array_equal(rep.z[:4], x0)


@needs_compiled
@pytest.mark.parametrize("mu", [0.0, 0.5, 1.0])
def test_backends_agree(mu):
    inst = gen_strongly_convex_qp(2, with_h=True)
    pb = inst.payload
    p = PDParams(0.3, 0.3, 1.0, mu)
    a = pd_iterate(pb, p, lam=0.4, max_iter=300, tol_abs=0.0, backend="compiled", record=True)
    b = pd_iterate(pb, p, lam=0.4, max_iter=300, tol_abs=0.0, backend="python", record=True)
    assert a.meta["backend"] == "compiled" and b.meta["backend"] == "python"
    assert np.allclose(a.iterates, b.iterates, atol=1e-12, rtol=1e-12)



@needs_compiled
@pytest.mark.parametrize("theta", [1.0, 2.0])
def test_backends_agree_on_large_operator(theta):
    # 120 x 60 is past the size where the compiled sweep switches to BLAS
    inst = gen_strongly_convex_qp(4, n=120, m=60, with_h=True)
    pb = inst.payload
    g = 0.4 / pb.norm_L
    p = PDParams(g, g, theta, 0.5)
    a = pd_iterate(pb, p, lam=0.5, max_iter=200, tol_abs=0.0, backend="compiled", record=True)
    b = pd_iterate(pb, p, lam=0.5, max_iter=200, tol_abs=0.0, backend="python", record=True)
    assert np.allclose(a.iterates, b.iterates, atol=1e-11, rtol=1e-11)

def test_chambolle_pock_iterates(rng):
    # theta = 2, lam = 1, h = 0: the textbook primal-dual loop
    n, m = 5, 3
    L = rng.standard_normal((m, n))
    b = rng.standard_normal(m)
    pb = SaddleProblem(L1(0.5), Point(b), L)
    g1 = g2 = 0.9 / np.linalg.norm(L, 2)
    rep = pd_iterate(pb, PDParams(g1, g2, 2.0), lam=1.0, max_iter=60, tol_abs=0.0, record=True)
    theirs = ref.condat_vu(lambda v: ref.soft(v, g1 * 0.5), ref.conj_prox_point(b, g2), lambda x: 0 * x, L,
                           np.zeros(n), np.zeros(m), g1, g2, 1.0, 60)
    assert np.allclose(rep.iterates, theirs[: rep.iterates.shape[0]], atol=1e-12)


def test_qp_solution_and_residuals():
    inst = gen_strongly_convex_qp(4)
    pb = inst.payload
    g = 0.9 / pb.norm_L
    rep = pd_iterate(pb, PDParams(g, g, 1.0), lam=1.0, max_iter=20_000, tol_abs=1e-11)
    assert rep.status == "converged"
    rx, ry = pb.residual(rep.z[: pb.n], rep.z[pb.n:])
    assert rx <= 1e-6 and ry <= 1e-6
    assert np.allclose(rep.z, inst.z_star, atol=1e-7)


def test_problem_dict_round_trip(rng):
    L = rng.standard_normal((2, 3))
    pb = SaddleProblem(Box(-1.0, 1.0), L1(0.4), L, h=CocoMap.affine_gradient(np.eye(3), np.ones(3)), l_mu=2.0,
                       norm_L=5.0)
    back = SaddleProblem.from_dict(pb.to_dict())
    assert back.norm_L == 5.0 and back.l_mu == 2.0
    x, y = rng.standard_normal(3), rng.standard_normal(2)
    assert back.objective(x) == pytest.approx(pb.objective(x))
    assert back.residual(x, y) == pytest.approx(pb.residual(x, y))


def test_norm_estimate_is_padded_upper_bound(rng):
    L = rng.standard_normal((4, 6))
    pb = SaddleProblem(Zero(6), Zero(4), L)
    true = np.linalg.norm(L, 2)
    assert true - 1e-9 <= pb.norm_L <= true * (1 + 1e-5)


def test_params_checked():
    with pytest.raises(InvalidParameters):
        PDParams(0.0, 1.0, 1.0)
    with pytest.raises(InvalidParameters):
        PDParams(1.0, 1.0, -1.0)
    with pytest.raises(InvalidParameters):
        PDParams(1.0, 1.0, 1.0, mu=1.5)
