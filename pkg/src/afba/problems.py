"""Seeded test problems with high-accuracy oracle solutions.

Every generator is a pure function of its arguments.  The returned
:class:`ProblemInstance` carries its oracle, the achieved optimality
residual and a note on how the oracle was computed; :meth:`ProblemInstance.verify`
re-checks the residual and is run on construction and on load.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from .atoms import Box, CocoMap, L1, Point, Quadratic, Zero, atom_from_dict
from .primal_dual import SaddleProblem, _coco_from_dict
from .variants import Admm3Problem, DRProblem

__all__ = [
    "ProblemInstance",
    "OracleError",
    "gen_lasso",
    "gen_strongly_convex_qp",
    "gen_admm3",
    "gen_dr_pair",
    "qp_kkt_oracle",
    "lasso_oracle",
    "problem_file",
]

#: largest accepted optimality residual of a shipped oracle
ORACLE_TOL = 1e-10


class OracleError(RuntimeError):
    """An oracle failed its optimality check."""


@dataclass
class ProblemInstance:
    """A test problem with its oracle.

    Attributes
    ----------
    kind : str
        ``"saddle"``, ``"dr"`` or ``"admm3"``.
    payload : SaddleProblem, DRProblem or Admm3Problem
    seed : int
    dims : dict
    oracle : dict
        Arrays of the solution: ``x``, ``y`` (saddle and Douglas-Rachford)
        or ``x1``, ``x2``, ``x3``, ``y`` (ADMM).
    oracle_accuracy : float
        Largest optimality residual of the oracle.
    provenance : str
        How the oracle was obtained.
    """

    kind: str
    payload: object
    seed: int
    dims: dict
    oracle: dict
    oracle_accuracy: float = 0.0
    provenance: str = ""
    extras: dict = field(default_factory=dict)

    @property
    def z_star(self) -> np.ndarray:
        """The oracle in the coordinates of the solvers' reports."""
        o = self.oracle
        if self.kind == "admm3":
            return np.concatenate([o["x1"], o["x2"], o["x3"], o["y"]])
        return np.concatenate([o["x"], o["y"]])

    def residuals(self) -> dict:
        o = self.oracle
        if self.kind == "saddle":
            rx, ry = self.payload.residual(o["x"], o["y"])
            return {"primal": rx, "dual": ry}
        if self.kind == "dr":
            r1, r2 = self.payload.residual(o["x"], o["y"])
            return {"primal": r1, "dual": r2}
        return self.payload.kkt_residuals([o["x1"], o["x2"], o["x3"]], o["y"])

    def verify(self, tol: float | None = None) -> float:
        """Largest optimality residual; raises :class:`OracleError` above ``tol``."""
        tol = ORACLE_TOL if tol is None else tol
        worst = max(self.residuals().values())
        if not worst <= tol:
            raise OracleError(f"oracle residual {worst:.3g} exceeds {tol:.3g}")
        return worst

    def to_dict(self) -> dict:
        d = {"kind": self.kind, "seed": self.seed, "dims": dict(self.dims), "provenance": self.provenance,
             "oracle_accuracy": self.oracle_accuracy,
             "oracle": {k: np.asarray(v).tolist() for k, v in self.oracle.items()},
             "extras": dict(self.extras)}
        if self.kind == "saddle":
            d["problem"] = self.payload.to_dict()
        elif self.kind == "dr":
            d["problem"] = self.payload.to_dict()
        else:
            p = self.payload
            d["problem"] = {"f": [fi.to_dict() for fi in p.f], "L": [Li.tolist() for Li in p.L],
                            "b": p.b.tolist()}
        return d

    @classmethod
    def from_dict(cls, d: dict, verify: bool = True) -> ProblemInstance:
        kind = d["kind"]
        pd_ = d["problem"]
        if kind == "saddle":
            payload = SaddleProblem.from_dict(pd_, seed=d.get("seed", 0))
        elif kind == "dr":
            n = int(pd_["dim"])
            payload = DRProblem(atom_from_dict(pd_["D"], n), atom_from_dict(pd_["E"], n),
                                _coco_from_dict(pd_["F"], n), n)
        elif kind == "admm3":
            L = [np.array(Li, dtype=float) for Li in pd_["L"]]
            fs = [atom_from_dict(fd, Li.shape[1]) for fd, Li in zip(pd_["f"], L)]
            payload = Admm3Problem(*fs, *L, pd_["b"])
        else:
            raise ValueError(f"unknown problem kind {kind!r}")
        inst = cls(kind, payload, int(d["seed"]), dict(d["dims"]),
                   {k: np.array(v, dtype=float) for k, v in d["oracle"].items()},
                   float(d.get("oracle_accuracy", 0.0)), d.get("provenance", ""), dict(d.get("extras", {})))
        if verify:
            inst.verify(max(ORACLE_TOL, 10 * inst.oracle_accuracy))
        return inst


def _orthogonal(rng, n):
    Q, R = np.linalg.qr(rng.standard_normal((n, n)))
    return Q * np.sign(np.diag(R))


def _spd(rng, n, lo, hi):
    U = _orthogonal(rng, n)
    w = np.linspace(lo, hi, n) if n > 1 else np.array([lo])
    M = (U * w) @ U.T
    return 0.5 * (M + M.T)


def _refine(K, rhs, sol, steps=2):
    for _ in range(steps):
        sol = sol + np.linalg.lstsq(K, rhs - K @ sol, rcond=None)[0]
    return sol


def qp_kkt_oracle(Q, q, L, b):
    """Solve ``min x'Qx/2 + q'x`` s.t. ``Lx = b`` through its KKT system.

    Returns ``(x, y)`` with ``Qx + q + L'y = 0`` and ``Lx = b``.

    Examples
    --------
    >>> import numpy as np
    >>> x, y = qp_kkt_oracle(np.eye(2), np.zeros(2), np.array([[1.0, 1.0]]), np.array([2.0]))
    >>> np.allclose(x, [1.0, 1.0]), np.allclose(y, [-1.0])
    (True, True)
    """
    Q = np.asarray(Q, dtype=float)
    L = np.asarray(L, dtype=float)
    n, m = Q.shape[0], L.shape[0]
    K = np.block([[Q, L.T], [L, np.zeros((m, m))]])
    rhs = np.concatenate([-np.asarray(q, dtype=float), np.asarray(b, dtype=float)])
    sol = _refine(K, rhs, np.linalg.solve(K, rhs))
    return sol[:n], sol[n:]


def gen_strongly_convex_qp(seed: int, n: int = 20, m: int = 10, with_h: bool = False) -> ProblemInstance:
    """``min x'Qx/2 + q'x`` s.t. ``Lx = b`` with ``Q`` positive definite.

    ``f`` is the quadratic (eigenvalues of ``Q`` spread over ``[1, 20]``),
    ``g`` the indicator of ``{b}`` and ``L`` a random full-row-rank
    matrix; rank-deficient draws are re-sampled with the next seed.  With
    ``with_h`` half of the Hessian moves into a smooth term ``h`` handled
    by forward steps.
    """
    if m > n:
        raise ValueError("full row rank needs m <= n")
    s = int(seed)
    while True:
        rng = np.random.default_rng(s)
        Q = _spd(rng, n, 1.0, 20.0)
        q = rng.standard_normal(n)
        L = rng.standard_normal((m, n)) / math.sqrt(n)
        b = rng.standard_normal(m)
        sv = sla.svdvals(L)
        if sv[-1] > 1e-3 * sv[0]:
            break
        s += 1
    x, y = qp_kkt_oracle(Q, q, L, b)
    if with_h:
        Qh = 0.5 * Q
        f = Quadratic(Q - Qh, q)
        h = CocoMap.affine(Qh)
    else:
        f, h = Quadratic(Q, q), None
    prob = SaddleProblem(f, Point(b), L, h=h, seed=int(seed))
    inst = ProblemInstance("saddle", prob, int(seed), {"n": n, "m": m}, {"x": x, "y": y},
                           provenance="dense KKT solve with iterative refinement",
                           extras={"resampled_seed": s, "with_h": with_h})
    inst.oracle_accuracy = inst.verify(1e-12)
    return inst


def lasso_oracle(A, b, reg, max_iter: int = 200_000):
    """Solve ``min reg ||x||_1 + ||Ax - b||^2 / 2`` to high accuracy.

    Accelerated proximal gradient followed by an active-set polish: on the
    detected support with fixed signs the optimality system is linear and
    is solved directly.  Returns ``(x, info)``.
    """
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    n = A.shape[1]
    Atb = A.T @ b
    if reg >= np.max(np.abs(Atb)):
        return np.zeros(n), {"method": "zero by subgradient test", "iterations": 0}
    G = A.T @ A
    Lc = float(sla.eigvalsh(G)[-1])
    t = 1.0 / Lc
    x = np.zeros(n)
    v = x.copy()
    s = 1.0

    def soft(u, k):
        return np.sign(u) * np.maximum(np.abs(u) - k, 0.0)

    it = 0
    for it in range(1, max_iter + 1):
        x_new = soft(v - t * (G @ v - Atb), t * reg)
        s_new = 0.5 * (1.0 + math.sqrt(1.0 + 4.0 * s * s))
        v = x_new + ((s - 1.0) / s_new) * (x_new - x)
        if np.linalg.norm(x_new - x) <= 1e-15 * max(1.0, np.linalg.norm(x_new)):
            x = x_new
            break
        x, s = x_new, s_new
    # restart-free polish on the support
    sup = np.abs(x) > 1e-9 * max(1.0, np.max(np.abs(x)))
    xs = np.zeros(n)
    if sup.any():
        As = A[:, sup]
        sg = np.sign(x[sup])
        xs[sup] = np.linalg.lstsq(As.T @ As, As.T @ b - reg * sg, rcond=None)[0]
        if np.any(np.sign(xs[sup]) != sg):
            xs = x
    return xs, {"method": "accelerated proximal gradient with active-set polish", "iterations": it}


def gen_lasso(seed: int, m: int = 40, n: int = 60, sparsity: float = 0.1, reg: float | None = None,
              formulation: str = "split") -> ProblemInstance:
    """Lasso ``min reg ||x||_1 + ||Ax - b||^2 / 2`` with a planted sparse signal.

    Parameters
    ----------
    sparsity : float
        Fraction of nonzeros in the planted signal.
    reg : float, optional
        Defaults to ``0.1 ||A'b||_inf``.
    formulation : {"split", "pd"}
        ``"split"``: ``f = 0``, ``g = reg ||.||_1``, ``L = Id`` and
        ``h = ||A. - b||^2/2`` (dual solution ``-A'(Ax* - b)``).
        ``"pd"``: ``f = reg ||.||_1``, ``g = ||. - b||^2/2``, ``L = A``
        (dual solution ``Ax* - b``).
    """
    if m > 200 or n > 200:
        raise ValueError("dimensions are limited to 200")
    rng = np.random.default_rng(int(seed))
    A = rng.standard_normal((m, n)) / math.sqrt(m)
    k = max(1, int(round(sparsity * n)))
    xn = np.zeros(n)
    idx = rng.choice(n, size=k, replace=False)
    xn[idx] = rng.standard_normal(k) + np.sign(rng.standard_normal(k))
    b = A @ xn + 0.01 * rng.standard_normal(m)
    if reg is None:
        reg = 0.1 * float(np.max(np.abs(A.T @ b)))
    reg = float(reg)
    x, info = lasso_oracle(A, b, reg)
    r = A @ x - b
    if formulation == "split":
        prob = SaddleProblem(Zero(n), L1(reg), np.eye(n), h=CocoMap.affine_gradient(A, b), norm_L=1.0,
                             seed=int(seed))
        y = -(A.T @ r)
    elif formulation == "pd":
        prob = SaddleProblem(L1(reg), Quadratic(np.eye(m), -b), A, seed=int(seed))
        y = r
    else:
        raise ValueError(f"unknown formulation {formulation!r}")
    inst = ProblemInstance("saddle", prob, int(seed), {"m": m, "n": n}, {"x": x, "y": y},
                           provenance=info["method"],
                           extras={"reg": reg, "formulation": formulation, "planted": xn.tolist()})
    inst.oracle_accuracy = inst.verify()
    return inst


def gen_admm3(seed: int, dims=(4, 3, 3, 5), zero_f23: bool = False) -> ProblemInstance:
    """Three quadratic blocks coupled by ``L1 x1 + L2 x2 + L3 x3 = b``.

    ``dims = (n1, n2, n3, p)``.  ``f1`` has Hessian eigenvalues in
    ``[1, 4]`` (``xi`` is the smallest); ``f2`` and ``f3`` are positive
    definite quadratics, or zero with ``zero_f23`` (then the method
    reduces to dual ascent on ``x1`` with exact minimization in ``x2`` and
    ``x3``).  ``L2`` and ``L3`` are re-drawn until injective.
    """
    n1, n2, n3, p = (int(v) for v in dims)
    if n2 > p or n3 > p:
        raise ValueError("L2 and L3 can only be injective when n2, n3 <= p")
    s = int(seed)
    while True:
        rng = np.random.default_rng(s)
        L1 = rng.standard_normal((p, n1)) / math.sqrt(p)
        L2 = rng.standard_normal((p, n2)) / math.sqrt(p)
        L3 = rng.standard_normal((p, n3)) / math.sqrt(p)
        if sla.svdvals(L2)[-1] > 0.05 and sla.svdvals(L3)[-1] > 0.05:
            break
        s += 1
    Q1 = _spd(rng, n1, 1.0, 4.0)
    q1 = rng.standard_normal(n1)
    b = rng.standard_normal(p)
    if zero_f23:
        Q2, q2, Q3, q3 = np.zeros((n2, n2)), np.zeros(n2), np.zeros((n3, n3)), np.zeros(n3)
        f2, f3 = Zero(n2), Zero(n3)
    else:
        Q2, Q3 = _spd(rng, n2, 0.5, 3.0), _spd(rng, n3, 0.5, 3.0)
        q2, q3 = rng.standard_normal(n2), rng.standard_normal(n3)
        f2, f3 = Quadratic(Q2, q2), Quadratic(Q3, q3)
    prob = Admm3Problem(Quadratic(Q1, q1), f2, f3, L1, L2, L3, b)
    N = n1 + n2 + n3
    Lall = np.hstack([L1, L2, L3])
    K = np.block([[sla.block_diag(Q1, Q2, Q3), Lall.T], [Lall, np.zeros((p, p))]])
    rhs = np.concatenate([-q1, -q2, -q3, b])
    sol = np.linalg.lstsq(K, rhs, rcond=None)[0]
    sol = _refine(K, rhs, sol)
    x1, x2, x3, y = sol[:n1], sol[n1:n1 + n2], sol[n1 + n2:N], sol[N:]
    inst = ProblemInstance("admm3", prob, int(seed), {"n1": n1, "n2": n2, "n3": n3, "p": p},
                           {"x1": x1, "x2": x2, "x3": x3, "y": y},
                           provenance="monolithic dense KKT solve",
                           extras={"xi": prob.xi, "zero_f23": zero_f23, "resampled_seed": s})
    inst.oracle_accuracy = inst.verify(1e-10)
    return inst


def _box_qp_oracle(G, c, lo, hi, max_iter=100_000):
    """``min x'Gx/2 + c'x`` over ``[lo, hi]``: projected gradient then active-set polish."""
    n = G.shape[0]
    Lc = float(sla.eigvalsh(G)[-1])
    t = 1.0 / Lc
    x = np.clip(np.zeros(n), lo, hi)
    for _ in range(max_iter):
        x_new = np.clip(x - t * (G @ x + c), lo, hi)
        if np.linalg.norm(x_new - x) <= 1e-15:
            x = x_new
            break
        x = x_new
    at_lo = np.isclose(x, lo, rtol=0, atol=1e-9)
    at_hi = np.isclose(x, hi, rtol=0, atol=1e-9)
    free = ~(at_lo | at_hi)
    xs = np.where(at_lo, lo, np.where(at_hi, hi, x))
    if free.any():
        fixed = ~free
        rhs = -c[free] - G[np.ix_(free, fixed)] @ xs[fixed]
        xs[free] = np.linalg.solve(G[np.ix_(free, free)], rhs)
        if np.any(xs[free] < lo[free]) or np.any(xs[free] > hi[free]):
            xs = x
    return xs


def gen_dr_pair(seed: int, n: int = 10, with_forward: bool = True) -> ProblemInstance:
    """``0 in Dx + Ex + Fx`` with ``D`` the normal cone of a box, ``E = Qx + q`` and
    ``F = A'(Ax - b)``.

    ``eta = ||A||^-2``.  The dual variable is ``y = Qx* + q``.  Without
    the forward term ``F = 0``.
    """
    if n > 100:
        raise ValueError("n is limited to 100")
    rng = np.random.default_rng(int(seed))
    Q = _spd(rng, n, 0.5, 5.0)
    q = 2.0 * rng.standard_normal(n)
    lo, hi = -0.5 * np.ones(n), 0.5 * np.ones(n)
    E = Quadratic(Q, q)
    D = Box(lo, hi)
    if with_forward:
        A = rng.standard_normal((n + 2, n)) / math.sqrt(n + 2)
        bb = rng.standard_normal(n + 2)
        F = CocoMap.affine_gradient(A, bb)
        G, c = Q + A.T @ A, q - A.T @ bb
    else:
        F = None
        G, c = Q, q
    x = _box_qp_oracle(G, c, lo, hi)
    y = Q @ x + q
    prob = DRProblem(D, E, F, n)
    inst = ProblemInstance("dr", prob, int(seed), {"n": n}, {"x": x, "y": y},
                           provenance="projected gradient with active-set polish",
                           extras={"eta": prob.eta, "with_forward": with_forward})
    inst.oracle_accuracy = inst.verify(1e-10)
    return inst


def problem_file(inst: ProblemInstance, variant: dict, run: dict | None = None, oracle: bool = True) -> dict:
    """Problem-file document for a saddle fixture (see ``afba solve``)."""
    if inst.kind != "saddle":
        raise ValueError("only saddle fixtures map to problem files")
    doc = inst.payload.to_dict()
    doc["variant"] = dict(variant)
    if run:
        doc["run"] = dict(run)
    if oracle:
        doc["oracle"] = {"x": inst.oracle["x"].tolist(), "y": inst.oracle["y"].tolist()}
    doc["seed"] = inst.seed
    return doc
