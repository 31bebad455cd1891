"""Generic asymmetric forward-backward-adjoint iteration.

Solves ``0 in A z + M z + C z`` with ``A`` maximally monotone and block
separable, ``M`` linear monotone and ``C`` cocoercive.  One iteration is::

    zbar  = (H + A)^-1 (H - M - C) z
    zt    = zbar - z
    alpha = lam ||zt||_P^2 / ||(H + M*) zt||_{S^-1}^2
    z+    = z + alpha S^-1 (H + M*) zt

where ``H = P + K`` is block lower triangular with ``P`` symmetric positive
definite and ``K`` skew.  When ``C = 0``, ``K = M`` and ``S = P`` the
semidefinite variant ``zbar = (H + A)^-1 P z``, ``z+ = z + lam (zbar - z)``
is available for singular ``P``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
import scipy.linalg as sla

from .atoms import BlockAtom, CocoMap, ProxAtom
from .errors import DimensionMismatch, InvalidParameters, InvariantViolation, NumericalFailure
from .linops import LinearMap, SymMetric
from .report import SolveReport
from .validity import LAMBDA_MARGIN, nonstrict, strict

__all__ = [
    "Inclusion",
    "PreconditionerTriple",
    "LambdaSchedule",
    "EngineState",
    "StepResult",
    "AFBA",
    "resolvent_block_triangular",
    "afba_step",
    "positive_p_step",
    "compute_delta",
    "fbfs_lambda",
    "run",
]


def _dense(op) -> np.ndarray:
    if op is None:
        return None
    if isinstance(op, (LinearMap, SymMetric)):
        return op.dense()
    return np.array(op, dtype=float)


@dataclass
class Inclusion:
    """The operator triple ``(A, M, C)``.

    ``A`` may be a single atom (one block) or a :class:`BlockAtom`.
    ``C`` may be ``None`` or a zero :class:`CocoMap` when absent.
    """

    A: BlockAtom
    M: np.ndarray
    C: CocoMap | None = None

    def __post_init__(self):
        if isinstance(self.A, ProxAtom):
            if self.A.dim is None:
                raise DimensionMismatch("a single-block atom needs an explicit dimension; wrap it in BlockAtom")
            self.A = BlockAtom([(self.A, self.A.dim)])
        self.M = _dense(self.M)
        n = self.A.dim
        if self.M.shape != (n, n):
            raise DimensionMismatch(f"M has shape {self.M.shape}, expected {(n, n)}")
        if self.C is not None and self.C.is_zero:
            self.C = None
        if self.C is not None and self.C.dim != n:
            raise DimensionMismatch(f"C acts on length {self.C.dim}, expected {n}")
        sym = 0.5 * (self.M + self.M.T)
        if sym.size and sla.eigvalsh(sym)[0] < -1e-10 * max(1.0, np.abs(self.M).max()):
            raise InvalidParameters("M is not monotone", [nonstrict("M_monotone", sla.eigvalsh(sym)[0], 0.0)])

    @property
    def dim(self) -> int:
        return self.A.dim


class PreconditionerTriple:
    """``(H, P, K, S)`` with block structure and the ``S^-1`` action.

    Parameters
    ----------
    H : array_like or LinearMap
        Block lower triangular; ``P`` and ``K`` are its symmetric and
        skew parts.
    partition : sequence of int
        Block sizes; must match the :class:`BlockAtom` of the inclusion.
    S : array_like, LinearMap or None
        Symmetric positive definite.  ``None`` means ``S = P`` (required
        for the semidefinite path).
    direction : callable, optional
        Closed form of ``zt -> S^-1 (H + M*) zt``.  When given it replaces
        the dense solve.
    """

    def __init__(self, H, partition, S=None, direction: Callable | None = None):
        H = _dense(H)
        n = H.shape[0]
        if H.shape != (n, n):
            raise DimensionMismatch("H must be square")
        sizes = tuple(int(s) for s in partition)
        if sum(sizes) != n:
            raise DimensionMismatch(f"partition {sizes} does not cover dimension {n}")
        self.H = H
        self.P = 0.5 * (H + H.T)
        self.K = 0.5 * (H - H.T)
        self.sizes = sizes
        bounds = np.cumsum((0,) + sizes)
        self.slices = tuple(slice(int(bounds[i]), int(bounds[i + 1])) for i in range(len(sizes)))
        for i, si in enumerate(self.slices):
            upper = H[si, si.stop:]
            if upper.size and np.max(np.abs(upper)) > 0:
                raise InvalidParameters("H is not block lower triangular",
                                        [nonstrict("H_block_lower_triangular", 0.0, float(np.max(np.abs(upper))))])
            Hii = H[si, si]
            if np.max(np.abs(Hii - Hii.T), initial=0.0) > 1e-12 * max(1.0, np.abs(Hii).max()):
                raise InvalidParameters("diagonal block of H is not symmetric",
                                        [nonstrict("H_diag_symmetric", 0.0, float(np.max(np.abs(Hii - Hii.T))))])
            lo = float(sla.eigvalsh(Hii)[0])
            if not lo > 0:
                raise InvalidParameters("diagonal block of H is not positive definite",
                                        [strict("H_diag_positive", lo, 0.0)])
        self.S = None if S is None else _dense(S)
        self._S_factor = None
        if self.S is not None:
            if self.S.shape != (n, n):
                raise DimensionMismatch("S has the wrong shape")
            self.S = 0.5 * (self.S + self.S.T)
            try:
                self._S_factor = sla.cho_factor(self.S)
            except np.linalg.LinAlgError as exc:
                raise InvalidParameters("S is not positive definite",
                                        [strict("S_positive", float(sla.eigvalsh(self.S)[0]), 0.0)]) from exc
        self.direction = direction

    @property
    def dim(self) -> int:
        return self.H.shape[0]

    @property
    def metric(self) -> np.ndarray:
        """The Fejér metric: ``S``, or ``P`` on the semidefinite path."""
        return self.P if self.S is None else self.S

    def S_inv(self, v) -> np.ndarray:
        if self._S_factor is None:
            raise InvariantViolation("S^-1 requested on the semidefinite path")
        return sla.cho_solve(self._S_factor, v)

    def diag_scalar(self, i) -> float | None:
        """``c`` if the ``i``-th diagonal block equals ``c Id``, else ``None``."""
        si = self.slices[i]
        Hii = self.H[si, si]
        c = Hii[0, 0]
        if np.array_equal(Hii, c * np.eye(Hii.shape[0])):
            return float(c)
        return None


def _block_solvers(pre: PreconditionerTriple, A: BlockAtom):
    if A.sizes != pre.sizes:
        raise DimensionMismatch(f"atom blocks {A.sizes} do not match the partition {pre.sizes}")
    solvers = []
    for i, (atom, _) in enumerate(A.blocks):
        c = pre.diag_scalar(i)
        if c is not None:
            g = 1.0 / c
            solvers.append(lambda r, atom=atom, g=g: atom.resolvent(g, g * r))
        elif atom.has_metric_resolvent:
            si = pre.slices[i]
            Hii = pre.H[si, si].copy()
            solvers.append(lambda r, atom=atom, Hii=Hii: atom.metric_resolvent(Hii, r))
        else:
            raise InvalidParameters(
                f"block {i}: {atom.kind} atom needs a scalar diagonal block of H",
                [nonstrict("H_diag_scalar_or_metric_resolvent", 0.0, 1.0)],
            )
    return solvers


def resolvent_block_triangular(pre: PreconditionerTriple, A: BlockAtom, rhs, _solvers=None) -> np.ndarray:
    """Solve ``rhs in (H + A) zbar`` block by block.

    ``zbar_i = (H_ii + A_i)^-1 (rhs_i - sum_{j<i} H_ij zbar_j)``.
    """
    if isinstance(A, ProxAtom):
        A = BlockAtom([(A, pre.dim)])
    solvers = _solvers or _block_solvers(pre, A)
    rhs = np.asarray(rhs, dtype=float)
    zbar = np.empty_like(rhs)
    for si, solve in zip(pre.slices, solvers):
        r = rhs[si]
        if si.start:
            r = r - pre.H[si, : si.start] @ zbar[: si.start]
        zbar[si] = solve(r)
    return zbar


def compute_delta(beta_P) -> float:
    """Relaxation bound ``2 - 1/(2 beta_P)``; ``2`` when the forward term is absent.

    Raises
    ------
    InvalidParameters
        If ``beta_P <= 1/4``.
    """
    if beta_P is None or math.isinf(beta_P):
        return 2.0
    q = strict("beta_P_above_quarter", beta_P, 0.25, "cocoercivity constant in the P metric must exceed 1/4")
    if not q.holds:
        raise InvalidParameters(f"beta_P = {beta_P} must exceed 1/4", [q])
    return 2.0 - 1.0 / (2.0 * beta_P)


def fbfs_lambda(ztilde, gamma, M) -> float:
    """``1 + (gamma ||M zt|| / ||zt||)^2``, which makes the step size equal ``gamma``."""
    M = _dense(M)
    nz = float(np.linalg.norm(ztilde))
    if nz == 0.0:
        raise ValueError("relaxation is undefined at zt = 0")
    return 1.0 + (gamma * float(np.linalg.norm(M @ ztilde)) / nz) ** 2


@dataclass
class LambdaSchedule:
    """Relaxation sequence.

    Kinds
    -----
    constant
        ``lam_n = value``.
    fbfs
        ``lam_n = fbfs_lambda(zt_n, gamma, M)``.
    table
        ``lam_n = table[min(n, len(table) - 1)]``.
    fixed_alpha
        ``lam_n = value * ||zt_n||_D^2 / ||zt_n||_P^2``, which makes the
        step size ``alpha_n = value``.
    """

    kind: str = "constant"
    value: float = 1.0
    table: tuple = ()
    gamma: float | None = None

    def __post_init__(self):
        if self.kind not in ("constant", "fbfs", "table", "fixed_alpha"):
            raise ValueError(f"unknown schedule kind {self.kind!r}")
        if self.kind == "table":
            if not len(self.table):
                raise ValueError("table schedule is empty")
            self.table = tuple(float(t) for t in self.table)
            if min(self.table) <= 0:
                raise InvalidParameters("table entries must be positive",
                                        [strict("lambda_positive", min(self.table), 0.0)])
        if self.kind == "fbfs" and not (self.gamma and self.gamma > 0):
            raise ValueError("fbfs schedule needs a positive gamma")

    @classmethod
    def constant(cls, lam):
        return cls("constant", float(lam))

    def check(self, delta: float, margin: float = LAMBDA_MARGIN):
        """Validate a constant schedule against ``0 < lam <= delta - margin``."""
        if self.kind != "constant":
            return []
        checks = [
            strict("lambda_positive", self.value, 0.0),
            nonstrict("lambda_below_delta", delta - margin, self.value, f"lambda must not exceed delta - {margin:g}"),
        ]
        bad = [q for q in checks if not q.holds]
        if bad:
            raise InvalidParameters(f"relaxation {self.value} outside ]0, {delta} - {margin:g}]", checks)
        return checks

    def __call__(self, n, ztilde=None, M=None, ratio=None) -> float:
        if self.kind == "constant":
            return self.value
        if self.kind == "table":
            return self.table[min(n, len(self.table) - 1)]
        if self.kind == "fbfs":
            return fbfs_lambda(ztilde, self.gamma, M)
        return self.value * ratio


@dataclass
class EngineState:
    """Iterate ``z_n`` with the quantities of the step that produced the next one."""

    z: np.ndarray
    n: int = 0
    zbar: np.ndarray | None = None
    ztilde: np.ndarray | None = None
    alpha: float | None = None
    lam: float | None = None


@dataclass
class StepResult:
    z_next: np.ndarray
    zbar: np.ndarray
    ztilde: np.ndarray
    lam: float
    alpha: float
    res_P: float
    res_D: float
    stationary: bool = False


class AFBA:
    """One configured solve of ``0 in Az + Mz + Cz``.

    Parameters
    ----------
    ops : Inclusion
    pre : PreconditionerTriple
    schedule : LambdaSchedule
    beta_P : float, optional
        Cocoercivity constant of ``C`` in the ``P`` metric.  Defaults to
        ``beta_canonical * min_eig(P)``.
    positive_p : bool
        Use the semidefinite-``P`` iteration.
    debug : bool
        Check the ``D`` lower bound at every iteration.
    validate : bool
        Check the constant schedule against ``delta`` before iterating.
    """

    def __init__(self, ops: Inclusion, pre: PreconditionerTriple, schedule: LambdaSchedule,
                 beta_P=None, positive_p=False, debug=False, validate=True):
        if ops.dim != pre.dim:
            raise DimensionMismatch("inclusion and preconditioner dimensions differ")
        self.ops = ops
        self.pre = pre
        self.schedule = schedule
        self.positive_p = bool(positive_p)
        self.debug = debug
        self._solvers = _block_solvers(pre, ops.A)
        self.HmM = pre.H - ops.M
        self.HpMt = pre.H + ops.M.T
        self.rho = float(sla.eigvalsh(pre.P)[0])
        if self.positive_p:
            self._check_positive_p()
            self.beta_P = None
            self.delta = 2.0
        else:
            if pre.S is None:
                raise InvalidParameters("S is required off the semidefinite path", [strict("S_given", 0.0, 0.0)])
            if not self.rho > 0:
                raise InvalidParameters("P is not positive definite; use the semidefinite path",
                                        [strict("P_strongly_positive", self.rho, 0.0)])
            if beta_P is None and ops.C is not None:
                beta_P = ops.C.beta * self.rho
            self.beta_P = beta_P if ops.C is not None else None
            self.delta = compute_delta(self.beta_P)
        if validate:
            schedule.check(self.delta)
        self.S_norm = float(np.abs(sla.eigvalsh(pre.S)).max()) if pre.S is not None else None

    def _check_positive_p(self):
        ops, pre = self.ops, self.pre
        if ops.C is not None:
            raise InvalidParameters("the semidefinite-P iteration needs C = 0", [nonstrict("C_absent", 0.0, 1.0)])
        if pre.S is not None and np.max(np.abs(pre.S - pre.P)) > 1e-12 * max(1.0, np.abs(pre.P).max()):
            raise InvalidParameters("the semidefinite-P iteration needs S = P", [nonstrict("S_equals_P", 0.0, 1.0)])
        if np.max(np.abs(pre.K - ops.M), initial=0.0) > 1e-12 * max(1.0, np.abs(ops.M).max()):
            raise InvalidParameters("the semidefinite-P iteration needs K = M", [nonstrict("K_equals_M", 0.0, 1.0)])
        if np.max(np.abs(ops.M + ops.M.T), initial=0.0) > 1e-12 * max(1.0, np.abs(ops.M).max()):
            raise InvalidParameters("the semidefinite-P iteration needs a skew M", [nonstrict("M_skew", 0.0, 1.0)])
        lo = float(sla.eigvalsh(pre.P)[0])
        scale = max(1.0, float(np.abs(pre.P).max()))
        if lo < -1e-10 * scale:
            raise InvalidParameters("P is not positive semidefinite", [nonstrict("P_psd", lo, -1e-10 * scale)])
        if self.schedule.kind == "constant":
            v = self.schedule.value
            checks = [nonstrict("lambda_above_margin", v, LAMBDA_MARGIN),
                      nonstrict("lambda_below_two", 2.0 - LAMBDA_MARGIN, v)]
            if not all(q.holds for q in checks):
                raise InvalidParameters(f"relaxation {v} must lie in [{LAMBDA_MARGIN:g}, 2 - {LAMBDA_MARGIN:g}]", checks)

    def forward(self, z) -> np.ndarray:
        r = self.HmM @ z
        if self.ops.C is not None:
            r = r - self.ops.C(z)
        return r

    def step(self, z, n=0) -> StepResult:
        pre = self.pre
        if self.positive_p:
            zbar = resolvent_block_triangular(pre, self.ops.A, pre.P @ z, self._solvers)
            zt = zbar - z
            nP = float(zt @ pre.P @ zt)
            lam = self.schedule(n, zt, self.ops.M, 1.0)
            res = math.sqrt(max(nP, 0.0))
            return StepResult(z + lam * zt, zbar, zt, lam, lam, res, res, stationary=not np.any(zt))
        zbar = resolvent_block_triangular(pre, self.ops.A, self.forward(z), self._solvers)
        zt = zbar - z
        nP = float(zt @ pre.P @ zt)
        if nP <= 0.0:
            if np.any(zt):
                raise InvariantViolation("||zt||_P vanished for nonzero zt although P is positive definite")
            return StepResult(z.copy(), zbar, zt, 0.0, 0.0, 0.0, 0.0, stationary=True)
        w = self.HpMt @ zt
        u = pre.direction(zt) if pre.direction is not None else pre.S_inv(w)
        den = float(w @ u)
        if not den > 0.0:
            raise InvariantViolation(f"||(H+M*)zt||^2_(S^-1) = {den} for nonzero zt")
        if self.debug:
            bound = self.rho ** 2 / self.S_norm * float(zt @ zt) - 1e-10
            if den < bound:
                raise InvariantViolation(f"D lower bound violated: {den} < {bound}")
        lam = self.schedule(n, zt, self.ops.M, den / nP)
        alpha = lam * nP / den
        return StepResult(z + alpha * u, zbar, zt, lam, alpha, math.sqrt(nP), math.sqrt(den))

    def run(self, z0, max_iter=10_000, tol_abs=1e-10, tol_rel=0.0, z_star=None,
            record_iterates=False, objective: Callable | None = None, split=None) -> SolveReport:
        """Iterate until ``||zt_n||_P <= tol_abs + tol_rel ||z_n||_P`` or the budget is spent."""
        z = np.array(z0, dtype=float)
        if z.shape != (self.pre.dim,):
            raise DimensionMismatch(f"start point has shape {z.shape}, expected ({self.pre.dim},)")
        if not np.all(np.isfinite(z)):
            raise NumericalFailure("non-finite start point", last_good=None, iteration=0)
        metric = self.pre.metric
        zs = None if z_star is None else np.asarray(z_star, dtype=float)

        def dist(v):
            d = v - zs
            return math.sqrt(max(float(d @ metric @ d), 0.0))

        lams, alphas, rp, rd = [], [], [], []
        fej = [] if zs is not None else None
        obj = [] if objective is not None else None
        its = [z.copy()] if record_iterates else None
        if fej is not None:
            fej.append(dist(z))
        if obj is not None:
            obj.append(objective(z))
        status = "max_iter"
        for n in range(max_iter):
            res = self.step(z, n)
            if res.stationary:
                status = "stationary" if n == 0 else "converged"
                break
            if not np.all(np.isfinite(res.z_next)):
                raise NumericalFailure(f"non-finite iterate at iteration {n}", last_good=z, iteration=n)
            lams.append(res.lam)
            alphas.append(res.alpha)
            rp.append(res.res_P)
            rd.append(res.res_D)
            tol = tol_abs + (tol_rel * math.sqrt(max(float(z @ self.pre.P @ z), 0.0)) if tol_rel else 0.0)
            z = res.z_next
            if fej is not None:
                fej.append(dist(z))
            if obj is not None:
                obj.append(objective(z))
            if its is not None:
                its.append(z.copy())
            if res.res_P <= tol:
                status = "converged"
                break
        return SolveReport(
            status=status,
            z=z,
            iterations=len(lams),
            lam=np.array(lams),
            alpha=np.array(alphas),
            res_P=np.array(rp),
            res_D=np.array(rd),
            fejer=None if fej is None else np.array(fej),
            objective=None if obj is None else np.array(obj),
            iterates=None if its is None else np.array(its),
            split=split,
            meta={"engine": "afba", "positive_p": self.positive_p, "delta": self.delta},
        )


def afba_step(state: EngineState, ops: Inclusion, pre: PreconditionerTriple, lam, beta_P=None) -> EngineState:
    """One iteration from ``state``; returns the next state.

    The returned state carries ``zbar``, ``ztilde``, ``alpha`` and ``lam``
    of the step that produced it.
    """
    sched = lam if isinstance(lam, LambdaSchedule) else LambdaSchedule.constant(lam)
    eng = AFBA(ops, pre, sched, beta_P=beta_P)
    r = eng.step(state.z, state.n)
    return EngineState(r.z_next, state.n + (0 if r.stationary else 1), r.zbar, r.ztilde, r.alpha, r.lam)


def positive_p_step(state: EngineState, ops: Inclusion, pre: PreconditionerTriple, lam) -> EngineState:
    """One semidefinite-``P`` iteration ``z+ = z + lam ((H + A)^-1 P z - z)``."""
    sched = lam if isinstance(lam, LambdaSchedule) else LambdaSchedule.constant(lam)
    eng = AFBA(ops, pre, sched, positive_p=True)
    r = eng.step(state.z, state.n)
    return EngineState(r.z_next, state.n + (0 if r.stationary else 1), r.zbar, r.ztilde, r.alpha, r.lam)


def run(ops: Inclusion, pre: PreconditionerTriple, schedule: LambdaSchedule, z0, *, positive_p=False,
        beta_P=None, debug=False, **kwargs) -> SolveReport:
    """Build an :class:`AFBA` engine and run it; keyword arguments go to :meth:`AFBA.run`."""
    return AFBA(ops, pre, schedule, beta_P=beta_P, positive_p=positive_p, debug=debug).run(z0, **kwargs)
