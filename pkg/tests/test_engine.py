import math

import numpy as np
import pytest

from afba.atoms import L1, BlockAtom, Box, CocoMap, Quadratic, Zero
from afba.engine import (AFBA, EngineState, Inclusion, LambdaSchedule, PreconditionerTriple, afba_step,
                         compute_delta, fbfs_lambda, positive_p_step, resolvent_block_triangular, run)
from afba.errors import DimensionMismatch, InvalidParameters

import reference as ref


def _psd(rng, n, shift=0.0):
    X = rng.standard_normal((n, n))
    return X @ X.T / n + shift * np.eye(n)


def _skew(rng, n):
    X = rng.standard_normal((n, n))
    return 0.5 * (X - X.T)


# relaxation bound

def test_compute_delta_examples():
    assert compute_delta(None) == 2.0
    assert compute_delta(math.inf) == 2.0
    assert compute_delta(0.5) == 1.0
    with pytest.raises(InvalidParameters) as exc:
        compute_delta(0.25)
    assert "beta_P_above_quarter" in exc.value.failed_names


def test_fbfs_lambda_examples():
    z = np.array([1.0, 0.0])
    assert fbfs_lambda(z, 0.5, np.zeros((2, 2))) == 1.0
    R = np.array([[0.0, -1.0], [1.0, 0.0]])  # rotation: ||Rz|| = ||z||
    assert fbfs_lambda(z, 0.5, R) == pytest.approx(1.25)
    with pytest.raises(ValueError):
        fbfs_lambda(np.zeros(2), 0.5, R)


def test_fbfs_relaxation_gives_step_gamma():
    gamma = 0.5
    R = np.array([[0.0, -1.0], [1.0, 0.0]])
    ops = Inclusion(BlockAtom([(Box(-1.0, 1.0), 2)]), R)
    pre = PreconditionerTriple(np.eye(2) / gamma, [2], S=np.eye(2))
    eng = AFBA(ops, pre, LambdaSchedule("fbfs", gamma=gamma), validate=False)
    r = eng.step(np.array([3.0, -2.0]))
    assert r.lam == pytest.approx(1.0 + gamma ** 2)
    assert r.alpha == pytest.approx(gamma)


def test_schedules():
    s = LambdaSchedule("table", table=(0.5, 1.0, 1.5))
    assert [s(n) for n in range(5)] == [0.5, 1.0, 1.5, 1.5, 1.5]
    with pytest.raises(ValueError):
        LambdaSchedule("geometric")
    with pytest.raises(InvalidParameters):
        LambdaSchedule("table", table=(0.0, 1.0))
    with pytest.raises(InvalidParameters) as exc:
        LambdaSchedule.constant(0.0).check(2.0)
    assert "lambda_positive" in exc.value.failed_names
    with pytest.raises(InvalidParameters) as exc:
        LambdaSchedule.constant(1.0).check(1.0)
    assert "lambda_below_delta" in exc.value.failed_names
    assert LambdaSchedule.constant(1.0 - 1e-6).check(1.0)


# block triangular resolvent

def test_single_identity_block_with_zero_atom():
    pre = PreconditionerTriple(np.eye(3), [3])
    v = np.array([1.0, -2.0, 0.5])
    assert np.array_equal(resolvent_block_triangular(pre, BlockAtom([(Zero(3), 3)]), v), v)


def test_scaled_identity_with_box_clamps():
    pre = PreconditionerTriple(2.0 * np.eye(3), [3])
    rhs = np.array([-1.0, 1.2, 5.0])
    out = resolvent_block_triangular(pre, Box(0.0, 1.0), rhs)
    assert np.allclose(out, np.clip(rhs / 2.0, 0.0, 1.0))


def test_two_blocks_match_monolithic_solve(rng):
    # with quadratic atoms (H + A) is linear, so the dense solve is the oracle
    n, m = 2, 2
    Q1, Q2 = _psd(rng, n), _psd(rng, m)
    q1, q2 = rng.standard_normal(n), rng.standard_normal(m)
    L = rng.standard_normal((m, n))
    g1, g2 = 0.7, 1.3
    H = np.block([[np.eye(n) / g1, np.zeros((n, m))], [-2.0 * L, np.eye(m) / g2]])
    pre = PreconditionerTriple(H, [n, m])
    A = BlockAtom([(Quadratic(Q1, q1), n), (Quadratic(Q2, q2), m)])
    for _ in range(5):
        rhs = rng.standard_normal(n + m)
        out = resolvent_block_triangular(pre, A, rhs)
        G = H + np.block([[Q1, np.zeros((n, m))], [np.zeros((m, n)), Q2]])
        assert np.allclose(out, np.linalg.solve(G, rhs - np.concatenate([q1, q2])), atol=1e-12)


def test_two_blocks_reproduce_prox_lines(rng):
    # the Condat-Vu preconditioner turns the resolvent into two sequential proxes
    n, m = 3, 2
    L = rng.standard_normal((m, n))
    g1, g2 = 0.4, 0.9
    H = np.block([[np.eye(n) / g1, np.zeros((n, m))], [-2.0 * L, np.eye(m) / g2]])
    pre = PreconditionerTriple(H, [n, m])
    A = BlockAtom([(L1(1.0), n), (Box(-0.3, 0.3), m)])
    rhs = rng.standard_normal(n + m)
    out = resolvent_block_triangular(pre, A, rhs)
    x = ref.soft(g1 * rhs[:n], g1)
    y = ref.proj_box(-0.3, 0.3, g2 * (rhs[n:] + 2.0 * L @ x))
    assert np.allclose(out, np.concatenate([x, y]), atol=1e-14)


def test_preconditioner_checks():
    with pytest.raises(InvalidParameters):
        PreconditionerTriple(np.array([[1.0, 0.5], [0.0, 1.0]]), [1, 1])
    with pytest.raises(DimensionMismatch):
        PreconditionerTriple(np.eye(3), [1, 1])
    with pytest.raises(InvalidParameters):
        PreconditionerTriple(np.eye(2), [2], S=-np.eye(2))
    # a non-scalar diagonal block with a prox-only atom is rejected
    pre = PreconditionerTriple(np.diag([1.0, 2.0]), [2])
    with pytest.raises(InvalidParameters):
        resolvent_block_triangular(pre, L1(1.0), np.ones(2))


# steps

def _qp_fbs(rng, n=4):
    Q = _psd(rng, n, 0.5)
    q = rng.standard_normal(n)
    C = CocoMap.affine(Q, q)
    return C, np.linalg.solve(Q, -q)


def test_fbs_step_size(rng):
    C, _ = _qp_fbs(rng)
    gamma, lam = 0.8 * C.beta, 0.9
    ops = Inclusion(BlockAtom([(Zero(4), 4)]), np.zeros((4, 4)), C)
    pre = PreconditionerTriple(np.eye(4) / gamma, [4], S=np.eye(4))
    z = rng.standard_normal(4)
    st = afba_step(EngineState(z), ops, pre, lam)
    assert st.alpha == pytest.approx(lam * gamma)
    assert np.allclose(st.z, ref.proximal_gradient(lambda v: v, C, z, gamma, lam, 1)[-1])


def test_positive_p_with_identity_matches_afba(rng):
    n = 5
    A = BlockAtom([(L1(0.3), n)])
    ops = Inclusion(A, np.zeros((n, n)))
    pre = PreconditionerTriple(np.eye(n), [n], S=np.eye(n))
    z = rng.standard_normal(n)
    for lam in (0.5, 1.0, 1.7):
        a = afba_step(EngineState(z), ops, pre, lam)
        b = positive_p_step(EngineState(z), ops, pre, lam)
        assert np.allclose(a.z, b.z, atol=1e-12)


def test_fixed_point_stays_put():
    ops = Inclusion(BlockAtom([(Box(0.0, 1.0), 2)]), np.zeros((2, 2)))
    pre = PreconditionerTriple(np.eye(2), [2], S=np.eye(2))
    z = np.array([0.2, 0.9])
    st = afba_step(EngineState(z), ops, pre, 1.0)
    assert np.array_equal(st.z, z) and st.n == 0 and not np.any(st.ztilde)
    st = positive_p_step(EngineState(z), ops, pre, 1.0)
    assert np.array_equal(st.z, z)
    rep = run(ops, pre, LambdaSchedule.constant(1.0), z)
    assert rep.iterations <= 1 and rep.status in ("stationary", "converged")


def test_relaxation_above_delta_rejected_before_iterating(rng):
    C, _ = _qp_fbs(rng)
    gamma = 2.0 * C.beta  # delta = 1
    ops = Inclusion(BlockAtom([(Zero(4), 4)]), np.zeros((4, 4)), C)
    pre = PreconditionerTriple(np.eye(4) / gamma, [4], S=np.eye(4) / gamma)
    with pytest.raises(InvalidParameters) as exc:
        run(ops, pre, LambdaSchedule.constant(1.2), np.zeros(4))
    assert "lambda_below_delta" in exc.value.failed_names


def test_qp_converges_to_kkt_point(rng):
    C, z_star = _qp_fbs(rng)
    gamma = 1.5 * C.beta
    ops = Inclusion(BlockAtom([(Zero(4), 4)]), np.zeros((4, 4)), C)
    pre = PreconditionerTriple(np.eye(4) / gamma, [4], S=np.eye(4) / gamma)
    rep = run(ops, pre, LambdaSchedule.constant(1.0), np.zeros(4), max_iter=10_000, tol_abs=1e-10, z_star=z_star)
    assert rep.status == "converged" and rep.res_P[-1] <= 1e-10
    assert np.allclose(rep.z, z_star, atol=1e-8)
    assert np.all(np.diff(rep.fejer) <= 1e-12 * rep.fejer[0])


def test_forward_backward_forward_matches_textbook(rng):
    n = 4
    M = _skew(rng, n)
    G = _psd(rng, n, 0.2)
    c = rng.standard_normal(n)
    C = CocoMap.affine(G, c)
    gamma = 0.4 / max(np.linalg.norm(M, 2), 1.0 / C.beta)
    ops = Inclusion(BlockAtom([(Box(-1.0, 1.0), n)]), M, C)
    pre = PreconditionerTriple(np.eye(n) / gamma, [n], S=np.eye(n))
    eng = AFBA(ops, pre, LambdaSchedule("fbfs", gamma=gamma), validate=False)
    z0 = rng.standard_normal(n)
    z = z0.copy()
    mine = [z.copy()]
    for k in range(30):
        r = eng.step(z, k)
        z = r.z_next
        mine.append(z.copy())
    theirs = ref.tseng_fbf(lambda v: ref.proj_box(-1.0, 1.0, v), M, C, z0, gamma, 30)
    assert np.allclose(np.array(mine), theirs, atol=1e-12)


def test_inclusion_checks():
    with pytest.raises(InvalidParameters):
        Inclusion(BlockAtom([(Zero(2), 2)]), -np.eye(2))
    with pytest.raises(DimensionMismatch):
        Inclusion(BlockAtom([(Zero(2), 2)]), np.zeros((3, 3)))
    with pytest.raises(DimensionMismatch):
        Inclusion(L1(1.0), np.zeros((2, 2)))


def test_positive_p_requires_no_forward_term(rng):
    C, _ = _qp_fbs(rng)
    ops = Inclusion(BlockAtom([(Zero(4), 4)]), np.zeros((4, 4)), C)
    pre = PreconditionerTriple(np.eye(4), [4])
    with pytest.raises(InvalidParameters):
        AFBA(ops, pre, LambdaSchedule.constant(1.0), positive_p=True)


def test_nan_start_aborts():
    from afba.errors import NumericalFailure
    ops = Inclusion(BlockAtom([(Zero(2), 2)]), np.zeros((2, 2)), CocoMap.affine(np.eye(2)))
    pre = PreconditionerTriple(np.eye(2), [2], S=np.eye(2))
    with pytest.raises(NumericalFailure):
        run(ops, pre, LambdaSchedule.constant(1.0), np.array([np.nan, 0.0]))
