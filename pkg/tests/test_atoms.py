import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays
from scipy.optimize import minimize_scalar

from afba.atoms import (L1, BlockAtom, Box, CocoMap, Conjugate, L2Norm, NonNeg, Point, Quadratic, SqL2, Zero,
                        atom_from_dict, coco_in_P_metric, evaluate, moreau_conjugate_prox, resolvent)
from afba.errors import DimensionMismatch

N = 4
vecs = arrays(float, N, elements=st.floats(-20, 20, allow_nan=False))
gammas = st.floats(0.05, 10.0)


def _atoms():
    rng = np.random.default_rng(3)
    X = rng.standard_normal((N, N))
    return [
        Zero(N),
        L1(0.7),
        SqL2(1.3),
        Quadratic(X @ X.T, rng.standard_normal(N)),
        Box(-np.ones(N), 2 * np.ones(N)),
        Point(np.arange(N, dtype=float)),
        NonNeg(N),
        L2Norm(0.9),
        Conjugate(L1(1.0)),
    ]


ATOMS = _atoms()
atom_ids = [a.kind for a in ATOMS]


# worked examples

def test_resolvent_examples():
    assert np.array_equal(resolvent(Zero(), 3.0, [1.0, -2.0]), [1.0, -2.0])
    assert resolvent(L1(1.0), 1.0, [2.5])[0] == pytest.approx(1.5)
    assert np.array_equal(resolvent(Box(0.0, 1.0), 0.3, [-0.5, 0.7, 3.0]), [0.0, 0.7, 1.0])


def test_scalar_prox_against_grid_search():
    # 1D minimisation oracle for the soft threshold
    obj = lambda x: abs(x) + 0.5 * (x - 2.5) ** 2
    assert minimize_scalar(obj, bounds=(-5, 5), method="bounded", options={"xatol": 1e-10}).x == pytest.approx(1.5, abs=1e-6)


def test_conjugate_prox_examples():
    assert np.allclose(moreau_conjugate_prox(Zero(), 1.0, [3.0, -2.0]), [0.0, 0.0])
    b = np.array([1.0, -0.5])
    v = np.array([0.2, 4.0])
    assert np.allclose(moreau_conjugate_prox(Point(b), 2.0, v), v - 2.0 * b)
    assert np.allclose(moreau_conjugate_prox(L1(1.0), 7.0, [0.3, -5.0]), [0.3, -1.0])


def test_eval_examples():
    assert evaluate(L1(), [1.0, -2.0]) == 3.0
    assert evaluate(Box(0.0, 1.0), [0.5, 2.0]) == math.inf
    assert evaluate(Quadratic(np.eye(2)), [3.0, 4.0]) == pytest.approx(12.5)


def test_coco_in_metric_examples():
    assert coco_in_P_metric(CocoMap.affine(np.eye(2)), 1.0) == 1.0
    assert coco_in_P_metric(CocoMap.affine(2.0 * np.eye(2)), 0.5) == pytest.approx(0.25)
    assert coco_in_P_metric(CocoMap.zero(3), 0.1) == math.inf
    with pytest.raises(ValueError):
        coco_in_P_metric(CocoMap.affine(np.eye(2)), 0.0)


def test_coco_in_metric_by_sampling(rng):
    # sampled cocoercivity in a metric P >= tau I
    G = 2.0 * np.eye(3)
    C = CocoMap.affine(G)
    X = rng.standard_normal((3, 3))
    P = X @ X.T + 0.5 * np.eye(3)
    tau = float(np.linalg.eigvalsh(P)[0])
    beta = coco_in_P_metric(C, tau)
    Pinv = np.linalg.inv(P)
    for _ in range(200):
        d = rng.standard_normal(3)
        Cd = G @ d
        assert Cd @ d >= beta * (Cd @ Pinv @ Cd) - 1e-12


def test_coco_constructors():
    A = np.array([[3.0, 0.0], [0.0, 1.0]])
    C = CocoMap.affine_gradient(A, [1.0, 1.0])
    assert C.beta == pytest.approx(1 / 9)
    assert np.allclose(C([1.0, 1.0]), A.T @ (A @ [1.0, 1.0] - [1.0, 1.0]))
    S = CocoMap.scaled(2.0, 3)
    assert S.beta == 2.0 and np.allclose(S(np.ones(3)), 0.5)
    assert CocoMap.zero(2).lipschitz == 0.0
    with pytest.raises(ValueError):
        CocoMap.scaled(0.0, 2)
    P = CocoMap.product([CocoMap.scaled(2.0, 1), CocoMap.affine(4.0 * np.eye(1))])
    assert P.beta == pytest.approx(0.25)


# structural properties

@pytest.mark.parametrize("atom", ATOMS, ids=atom_ids)
@given(u=vecs, v=vecs, g=gammas)
def test_firm_nonexpansiveness(atom, u, v, g):
    pu, pv = atom.resolvent(g, u), atom.resolvent(g, v)
    lhs = float(np.sum((pu - pv) ** 2))
    rhs = float((pu - pv) @ (u - v))
    assert lhs <= rhs + 1e-9 * (1 + np.sum((u - v) ** 2))


@pytest.mark.parametrize("atom", ATOMS, ids=atom_ids)
@given(v=vecs, g=gammas)
def test_moreau_decomposition(atom, v, g):
    # v = prox_{g f}(v) + g prox_{f*/g}(v/g)
    p = atom.resolvent(g, v)
    q = moreau_conjugate_prox(atom, 1.0 / g, v / g)
    assert np.allclose(p + g * q, v, atol=1e-9 * (1 + np.abs(v).max()))


@pytest.mark.parametrize("atom", [a for a in ATOMS if not isinstance(a, (Box, Point, NonNeg, Conjugate))],
                         ids=lambda a: a.kind)
@given(v=vecs, g=gammas, seed=st.integers(0, 1000))
def test_resolvent_is_minimiser(atom, v, g, seed):
    rng = np.random.default_rng(seed)
    p = atom.resolvent(g, v)
    best = evaluate(atom, p) + np.sum((p - v) ** 2) / (2 * g)
    for _ in range(10):
        w = p + 1e-2 * rng.standard_normal(N)
        assert evaluate(atom, w) + np.sum((w - v) ** 2) / (2 * g) >= best - 1e-9 * (1 + abs(best))


@pytest.mark.parametrize("atom", [a for a in ATOMS if isinstance(a, (Box, Point, NonNeg))], ids=lambda a: a.kind)
@given(v=vecs, g=gammas)
def test_projection_is_feasible_and_idempotent(atom, v, g):
    p = atom.resolvent(g, v)
    assert evaluate(atom, p) == 0.0
    assert np.allclose(atom.resolvent(g, p), p)


@pytest.mark.parametrize("atom", ATOMS, ids=atom_ids)
def test_dict_round_trip(atom):
    back = atom_from_dict(atom.to_dict(), N)
    v = np.linspace(-3, 3, N)
    assert back.kind == atom.kind
    assert np.allclose(back.resolvent(0.7, v), atom.resolvent(0.7, v))


def test_unknown_kind_and_dimension_errors():
    with pytest.raises(ValueError):
        atom_from_dict({"kind": "huber"})
    with pytest.raises(DimensionMismatch):
        atom_from_dict({"kind": "point", "b": [1.0, 2.0]}, 3)
    with pytest.raises(DimensionMismatch):
        Point([1.0, 2.0]).resolvent(1.0, np.ones(3))


@pytest.mark.parametrize("g", [0.0, -1.0, math.inf, math.nan])
def test_nonpositive_step_rejected(g):
    with pytest.raises(ValueError):
        L1().resolvent(g, np.ones(2))
    with pytest.raises(ValueError):
        moreau_conjugate_prox(L1(), g, np.ones(2))


def test_block_atom(rng):
    A = BlockAtom([(L1(1.0), 2), (Box(0.0, 1.0), 3)])
    assert A.sizes == (2, 3) and A.dim == 5
    v = np.array([2.0, -0.5, -1.0, 0.5, 4.0])
    out = A.resolvent([1.0, 9.0], v)
    assert np.allclose(out, [1.0, 0.0, 0.0, 0.5, 1.0])
    assert A.value(out) == pytest.approx(1.0)
    with pytest.raises(DimensionMismatch):
        BlockAtom([(Point([1.0]), 2)])
