"""Named algorithm presets.

Every builder validates its own sufficient conditions, returns a solver
whose :meth:`~Solver.run` executes the specialized closed-form iteration,
and exposes :meth:`~Solver.engine` with the equivalent configuration of the
generic engine for cross-checks.

========================  =========  =====  ================================
name                      theta      mu     relaxation policy
========================  =========  =====  ================================
``primal_dual``           any        any    constant ``lam``
``condat_vu``             2          n/a    constant ``lam``
``bac``                   0          1/2    ``lam_n`` chosen so ``alpha_n = 1``
``dst``                   1          1      ``lam_n`` chosen so ``alpha_n = 1``
``mu0``                   any        0      ``lam_n`` chosen so ``alpha_n = 1``
``dr_forward``            any        0      ``alpha_n = rho`` (``L = Id``)
``drs_classic``           2          0      ``alpha_n = rho``, no forward term
``admm3``                 (1, 2)     0      ``rho = 1`` on the dual problem
``fbs`` / ``ppa``         n/a        n/a    constant ``lam``, ``S = Id``
``fbfs``                  n/a        n/a    ``lam_n`` chosen so ``alpha_n = gamma``
========================  =========  =====  ================================
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import scipy.linalg as sla

from .atoms import BlockAtom, CocoMap, ProxAtom, Quadratic, SqL2, Zero
from .engine import AFBA, Inclusion, LambdaSchedule, PreconditionerTriple
from .errors import DimensionMismatch, InvalidParameters
from .linops import op_norm
from .primal_dual import (PDParams, SaddleProblem, _attach_sandwich, _pd_cases, _select, build_S_family,
                          pd_iterate, pd_matrices, tau_of)
from .report import SolveReport
from .validity import LAMBDA_MARGIN, Certificate, nonstrict, require, strict

__all__ = [
    "VariantSpec",
    "EngineConfig",
    "Solver",
    "PDSolver",
    "DRProblem",
    "DRSolver",
    "StronglyConvex",
    "Admm3Problem",
    "Admm3Solver",
    "FBSolver",
    "FBFSSolver",
    "build_primal_dual",
    "build_condat_vu",
    "build_bac",
    "build_dst",
    "build_mu0",
    "build_dr_forward",
    "build_drs_classic",
    "build_admm3",
    "build_fbs",
    "build_ppa",
    "build_fbfs",
    "BUILDERS",
    "VARIANT_NAMES",
    "PD_VARIANTS",
    "default_params",
]

#: smallest singular value accepted as a certificate of injectivity
RANK_FLOOR = 1e-8


@dataclass
class VariantSpec:
    """A built preset: its name, bound parameters and validity record.

    Attributes
    ----------
    name : str
    params : dict
        Parameters as given to the builder.
    theta, mu : float or None
        Coupling and metric blend of the underlying primal-dual instance
        (``None`` when the variant is not a primal-dual instance).
    lam_policy : str
        ``"constant"``, ``"alpha_one"``, ``"alpha_rho"`` or ``"fbfs"``.
    certificate : Certificate
    """

    name: str
    params: dict
    theta: float | None
    mu: float | None
    lam_policy: str
    certificate: Certificate

    @property
    def inequalities(self):
        return self.certificate.inequalities

    def to_dict(self) -> dict:
        return {"name": self.name, "params": dict(self.params), "theta": self.theta, "mu": self.mu,
                "lam_policy": self.lam_policy, "certificate": self.certificate.to_dict()}


@dataclass
class EngineConfig:
    """Inputs of :class:`afba.engine.AFBA` that reproduce a preset."""

    ops: Inclusion
    pre: PreconditionerTriple
    schedule: LambdaSchedule
    positive_p: bool = False
    beta_P: float | None = None

    def build(self, debug=False) -> AFBA:
        return AFBA(self.ops, self.pre, self.schedule, beta_P=self.beta_P, positive_p=self.positive_p,
                    debug=debug, validate=False)


class Solver:
    """Common interface of the presets."""

    spec: VariantSpec
    split: int | None = None

    @property
    def certificate(self) -> Certificate:
        return self.spec.certificate

    @property
    def fejer_metric(self) -> np.ndarray | None:
        """Metric in which the iterates are Fejér monotone (``None`` if not claimed)."""
        return None

    def engine(self) -> EngineConfig:
        raise NotImplementedError

    def run_engine(self, z0=None, debug=False, **kwargs) -> SolveReport:
        """Run the generic engine configuration from ``z0`` (engine coordinates)."""
        cfg = self.engine()
        z0 = np.zeros(cfg.pre.dim) if z0 is None else np.asarray(z0, dtype=float)
        kwargs.setdefault("split", self.split)
        return cfg.build(debug=debug).run(z0, **kwargs)


# ----------------------------------------------------------------------------
# primal-dual presets


class PDSolver(Solver):
    """A primal-dual instance with a fixed ``(theta, mu)`` and relaxation policy."""

    def __init__(self, problem: SaddleProblem, params: PDParams, spec: VariantSpec, lam: float = 1.0,
                 fixed_alpha: bool = False):
        self.problem = problem
        self.params = params
        self.spec = spec
        self.lam = float(lam)
        self.fixed_alpha = fixed_alpha
        self.split = problem.n
        self._mats = None

    @property
    def matrices(self) -> dict:
        if self._mats is None:
            self._mats = pd_matrices(self.problem.Ld, self.params)
        return self._mats

    @property
    def positive_p(self) -> bool:
        return self.certificate.positive_p

    @property
    def fejer_metric(self) -> np.ndarray:
        return self.matrices["P"] if self.positive_p else self.matrices["S"]

    @property
    def P(self) -> np.ndarray:
        return self.matrices["P"]

    @property
    def D(self) -> np.ndarray:
        return self.matrices["D"]

    def run(self, x0=None, y0=None, *, max_iter: int = 10_000, tol_abs: float = 1e-10, tol_rel: float = 0.0,
            z_star=None, record: bool = False, objective: bool = False, backend: str | None = None) -> SolveReport:
        rep = pd_iterate(self.problem, self.params, x0, y0, lam=self.lam, fixed_alpha=self.fixed_alpha,
                         max_iter=max_iter, tol_abs=tol_abs, tol_rel=tol_rel, z_star=z_star, record=record,
                         objective=objective, certificate=self.certificate, backend=backend)
        rep.meta["variant"] = self.spec.name
        return rep

    def engine(self) -> EngineConfig:
        ops = self.problem.inclusion()
        pre = build_S_family(self.problem.Ld, self.params, positive_p=self.positive_p)
        if self.fixed_alpha:
            sched = LambdaSchedule("fixed_alpha", self.lam)
        else:
            sched = LambdaSchedule.constant(self.lam)
        beta = self.certificate.beta_P if ops.C is not None else None
        return EngineConfig(ops, pre, sched, self.positive_p, beta)


def _pd_spec(name, problem, params, cert, lam_policy, extra=None):
    p = {"gamma1": params.gamma1, "gamma2": params.gamma2, "theta": params.theta, "mu": params.mu}
    p.update(extra or {})
    return VariantSpec(name, p, params.theta, params.mu, lam_policy, cert)


def build_primal_dual(problem: SaddleProblem, gamma1: float, gamma2: float, theta: float, mu: float = 1.0,
                      lam: float = 1.0) -> PDSolver:
    """Generic primal-dual instance with constant relaxation ``lam``."""
    params = PDParams(gamma1, gamma2, theta, mu)
    cert = _select("primal_dual", _pd_cases(problem, params), lam)
    _attach_sandwich(cert, problem, params, lam)
    return PDSolver(problem, params, _pd_spec("primal_dual", problem, params, cert, "constant", {"lam": lam}), lam)


_CONDAT_NAMES = {"iii": "gamma1_inv_minus_gamma2_L2", "ii": "gamma1_inv_minus_gamma2_L2"}


def build_condat_vu(problem: SaddleProblem, gamma1: float, gamma2: float, lam: float = 1.0) -> PDSolver:
    """``theta = 2``: both updates relax by ``lam``.

    Conditions, from the most general to the most specific structure:
    the general cocoercive case; ``l`` the indicator of ``{0}`` with
    ``1/gamma1 - gamma2 ||L||^2 > beta_h / 4``; additionally ``h = 0`` with
    ``1/gamma1 - gamma2 ||L||^2 > 0``; and the semidefinite case
    ``1/gamma1 - gamma2 ||L||^2 >= 0`` with ``lam`` in ``[1e-6, 2 - 1e-6]``.
    """
    params = PDParams(gamma1, gamma2, 2.0, 1.0)
    cert = _select("condat_vu", _pd_cases(problem, params, names=_CONDAT_NAMES), lam)
    if not cert.positive_p:
        # D = P when theta = 2, so every admitted lam keeps ||zt||_D monotone
        cert.c1 = cert.c2 = 1.0
        cert.rate_eligible = True
    spec = VariantSpec("condat_vu", {"gamma1": gamma1, "gamma2": gamma2, "lam": lam}, 2.0, None, "constant", cert)
    return PDSolver(problem, params, spec, lam)


def _forward_flags(problem):
    return problem.h is not None, problem.l_mu is not None


def _inv_betas(problem):
    return [1.0 / b for b in (problem.beta_h, problem.beta_l) if b > 0]


def _bac_cases(problem, g1, g2):
    nL = problem.norm_L
    k = 1.0 / g1 - g2 * nL ** 2
    tau = min(1.0 / g1, 1.0 / g2)
    has_h, has_l = _forward_flags(problem)
    cases = []
    if not has_h and not has_l:
        cases.append(dict(case="iii", beta=None, tau=tau, positive_p=False,
                          checks=[strict("bac_no_forward", k, 0.0, "1/gamma1 - gamma2 ||L||^2 > 0")]))
        return cases
    if not has_l:
        cases.append(dict(case="ii", beta=1.0 / (problem.beta_h * g1), tau=tau, positive_p=False,
                          checks=[strict("bac_l_zero", k, problem.beta_h / 2.0,
                                         "1/gamma1 - gamma2 ||L||^2 > beta_h / 2")]))
    beta = tau * min(_inv_betas(problem))
    cases.append(dict(case="i", beta=beta, tau=tau, positive_p=False,
                      checks=[strict("bac_general", k, 1.0 / (2.0 * beta * g1),
                                     "1/gamma1 - gamma2 ||L||^2 > 1/(2 beta gamma1)")]))
    return cases


def build_bac(problem: SaddleProblem, gamma1: float, gamma2: float) -> PDSolver:
    """``theta = 0``, ``mu = 1/2`` with unit step size.

    Both proximal steps are evaluated at ``(x_n, y_n)``; then
    ``x+ = xbar - gamma1 L* yt`` and ``y+ = ybar + gamma2 L xt``.  The
    implied relaxation ``lam_n = ||zt||_D^2 / ||zt||_P^2`` is recorded.
    """
    params = PDParams(gamma1, gamma2, 0.0, 0.5)
    cert = _select("bac", _bac_cases(problem, gamma1, gamma2))
    kappa = gamma1 * gamma2 * problem.norm_L ** 2
    # sup lam_n <= 1 + kappa = c2 and c1 = 1, so lam_n <= c1 delta / c2 when c2^2 <= delta
    flag = (1.0 + kappa) ** 2 <= cert.delta
    cert.extras.update(o_rate_flag=bool(flag), claimed_c1=1.0, claimed_c2=1.0 + kappa)
    _attach_sandwich(cert, problem, params, None)
    cert.rate_eligible = bool(flag)
    spec = VariantSpec("bac", {"gamma1": gamma1, "gamma2": gamma2}, 0.0, 0.5, "alpha_one", cert)
    return PDSolver(problem, params, spec, 1.0, fixed_alpha=True)


def _dst_cases(problem, g1, g2):
    nL = problem.norm_L
    kappa = g1 * g2 * nL ** 2
    params = PDParams(g1, g2, 1.0, 1.0)
    tau = tau_of(params, nL)
    gap = 1.0 / g1 - 0.25 * g2 * nL ** 2
    has_h, has_l = _forward_flags(problem)
    cases = []
    if not has_h and not has_l:
        cases.append(dict(case="iii", beta=None, tau=tau, positive_p=False,
                          checks=[strict("dst_no_forward", 1.0 / g1 - g2 * nL ** 2, 0.0,
                                         "1/gamma1 - gamma2 ||L||^2 > 0")]))
        return cases
    if not has_l:
        cases.append(dict(case="ii", beta=gap / problem.beta_h, tau=tau, positive_p=False,
                          checks=[strict("dst_l_zero", 2.0 - kappa - math.sqrt(kappa), problem.beta_h * g1,
                                         "2 - kappa - sqrt(kappa) > beta_h gamma1, kappa = gamma1 gamma2 ||L||^2")]))
    beta = tau * min(_inv_betas(problem))
    if 2.0 * beta > 1.0:
        lhs = 1.0 / g1 - g2 * (1.0 + 1.0 / (2.0 * (2.0 * beta - 1.0))) ** 2 * nL ** 2
    else:
        lhs = -math.inf
    cases.append(dict(case="i", beta=beta, tau=tau, positive_p=False,
                      checks=[strict("dst_two_beta_above_one", 2.0 * beta, 1.0),
                              strict("dst_general", lhs, 0.0,
                                     "1/gamma1 - gamma2 (1 + 1/(2(2 beta - 1)))^2 ||L||^2 > 0")]))
    return cases


def build_dst(problem: SaddleProblem, gamma1: float, gamma2: float) -> PDSolver:
    """``theta = 1``, ``mu = 1`` with unit step size.

    ``xbar = prox(x - gamma1 L*y - gamma1 grad h(x))``,
    ``y+ = prox_{gamma2 g*}(y + gamma2 L xbar - gamma2 grad l*(y))``,
    ``x+ = xbar - gamma1 L*(y+ - y)``.
    """
    params = PDParams(gamma1, gamma2, 1.0, 1.0)
    cert = _select("dst", _dst_cases(problem, gamma1, gamma2))
    kappa = gamma1 * gamma2 * problem.norm_L ** 2
    sk = math.sqrt(kappa)
    if sk < 2.0:
        inv_beta = 0.0 if cert.beta_P is None else 1.0 / cert.beta_P
        flag = inv_beta < 4.0 - 4.0 * (2.0 + sk) / (2.0 - sk) ** 2
        cert.extras.update(claimed_c1=2.0 / (2.0 + sk), claimed_c2=2.0 / (2.0 - sk))
    else:
        flag = False
    cert.extras["o_rate_flag"] = bool(flag)
    _attach_sandwich(cert, problem, params, None)
    cert.rate_eligible = bool(flag)
    spec = VariantSpec("dst", {"gamma1": gamma1, "gamma2": gamma2}, 1.0, 1.0, "alpha_one", cert)
    return PDSolver(problem, params, spec, 1.0, fixed_alpha=True)


def build_mu0(problem: SaddleProblem, gamma1: float, gamma2: float, theta: float) -> PDSolver:
    """``mu = 0`` with unit step size; needs ``h = 0`` and ``l`` the indicator of ``{0}``.

    ``x+ = prox(x - gamma1 L*y)``,
    ``ybar = prox_{gamma2 g*}(y + gamma2 L((1-theta) x + theta x+))``,
    ``y+ = ybar + gamma2 (2 - theta) L(x+ - x)``.
    """
    params = PDParams(gamma1, gamma2, theta, 0.0)
    nL = problem.norm_L
    present = int(problem.h is not None) + int(problem.l_mu is not None)
    structure = [nonstrict("mu0_structure", 0.0, float(present), "h = 0 and l = indicator of {0}")]
    factor = theta ** 2 - 3.0 * theta + 3.0
    cases = [dict(case="i", beta=None, tau=tau_of(params, nL), positive_p=False,
                  checks=[strict("mu0_positivity", 1.0 / gamma1 - gamma2 * factor * nL ** 2, 0.0,
                                 "1/gamma1 - gamma2 (theta^2 - 3 theta + 3) ||L||^2 > 0")])]
    if theta == 2.0:
        cases.append(dict(case="ii", beta=None, tau=0.0, positive_p=True, delta=2.0,
                          checks=[nonstrict("mu0_theta2", 1.0 / gamma1 - gamma2 * nL ** 2, 0.0,
                                            "1/gamma1 - gamma2 ||L||^2 >= 0")]))
    cert = _select("mu0", cases, extra_checks=structure)
    if not cert.positive_p:
        _attach_sandwich(cert, problem, params, None)
        cert.rate_eligible = False
    spec = VariantSpec("mu0", {"gamma1": gamma1, "gamma2": gamma2, "theta": theta}, theta, 0.0, "alpha_one", cert)
    return PDSolver(problem, params, spec, 1.0, fixed_alpha=True)


# ----------------------------------------------------------------------------
# Douglas-Rachford with a forward term


@dataclass
class DRProblem:
    """``0 in D x + E x + F x`` with ``D = df``, ``E = dg`` and ``F`` cocoercive.

    The dual variable is ``y in E x``.
    """

    D: ProxAtom
    E: ProxAtom
    F: CocoMap | None
    dim: int

    def __post_init__(self):
        if self.F is not None and self.F.is_zero:
            self.F = None
        if self.F is not None and self.F.dim != self.dim:
            raise DimensionMismatch("F does not act on the problem dimension")
        for a in (self.D, self.E):
            if a.dim is not None and a.dim != self.dim:
                raise DimensionMismatch(f"{a.kind} atom has the wrong dimension")

    @property
    def eta(self) -> float:
        return math.inf if self.F is None else self.F.beta

    def objective(self, x) -> float:
        x = np.asarray(x, dtype=float)
        v = self.D.value(x) + self.E.value(x)
        return float(v + (0.0 if self.F is None else self.F.value(x)))

    def residual(self, x, y) -> tuple[float, float]:
        """``||x - J_D(x - Fx - y)||`` and ``||x - J_E(x + y)||``."""
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        Fx = np.zeros(self.dim) if self.F is None else self.F(x)
        r1 = x - self.D.resolvent(1.0, x - Fx - y)
        r2 = x - self.E.resolvent(1.0, x + y)
        return float(np.linalg.norm(r1)), float(np.linalg.norm(r2))

    def as_saddle(self) -> SaddleProblem:
        """The same problem as a primal-dual instance with ``L = Id``."""
        return SaddleProblem(self.D, self.E, np.eye(self.dim), h=self.F, l_mu=None, norm_L=1.0)

    def to_dict(self) -> dict:
        return {"dim": self.dim, "D": self.D.to_dict(), "E": self.E.to_dict(),
                "F": {"kind": "zero"} if self.F is None else self.F.to_dict()}


class DRSolver(Solver):
    """Four-line Douglas-Rachford iteration with a forward term.

    ``xbar = J_{gamma D}(s - gamma F x)``,
    ``r = J_{gamma E}(theta xbar + (2 - theta) x - s)``,
    ``s+ = s + rho (r - xbar)``, ``x+ = x + rho (xbar - x)``.

    Reports use the primal-dual coordinates ``z = (x, (x - s)/gamma)``.
    """

    def __init__(self, problem: DRProblem, gamma: float, theta: float, rho: float, spec: VariantSpec):
        self.problem = problem
        self.gamma = float(gamma)
        self.theta = float(theta)
        self.rho = float(rho)
        self.spec = spec
        self.split = problem.dim
        self.params = PDParams(self.gamma, 1.0 / self.gamma, self.theta, 0.0)
        self._mats = None

    @property
    def matrices(self) -> dict:
        if self._mats is None:
            self._mats = pd_matrices(np.eye(self.problem.dim), self.params)
        return self._mats

    @property
    def positive_p(self) -> bool:
        return self.certificate.positive_p

    @property
    def fejer_metric(self) -> np.ndarray:
        return self.matrices["P"] if self.positive_p else self.matrices["S"]

    @property
    def P(self):
        return self.matrices["P"]

    @property
    def D(self):
        return self.matrices["D"]

    def to_z(self, x, s) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return np.concatenate([x, (x - np.asarray(s, dtype=float)) / self.gamma])

    def run(self, x0=None, s0=None, *, max_iter: int = 10_000, tol_abs: float = 1e-10, tol_rel: float = 0.0,
            z_star=None, record: bool = False, objective: bool = False) -> SolveReport:
        pb = self.problem
        n = pb.dim
        g, th, rho = self.gamma, self.theta, self.rho
        x = np.zeros(n) if x0 is None else np.array(x0, dtype=float)
        s = x.copy() if s0 is None else np.array(s0, dtype=float)
        if x.shape != (n,) or s.shape != (n,):
            raise DimensionMismatch("start point does not match the problem dimension")
        W = self.fejer_metric if z_star is not None else None
        zs = None if z_star is None else np.asarray(z_star, dtype=float)

        def dist(z):
            d = z - zs
            return math.sqrt(max(float(d @ W @ d), 0.0))

        z = self.to_z(x, s)
        its = [z] if record else None
        fej = [dist(z)] if zs is not None else None
        obj = [pb.objective(x)] if objective else None
        lams, alphas, rps, rds = [], [], [], []
        status = "max_iter"
        c_x = (1.0 - th) * (2.0 - th) / g
        c_c = 2.0 * (1.0 - th)
        for k in range(max_iter):
            v = s if pb.F is None else s - g * pb.F(x)
            xbar = pb.D.resolvent(g, v)
            r = pb.E.resolvent(g, th * xbar + (2.0 - th) * x - s)
            xt = xbar - x
            yt = (th * xbar + (1.0 - th) * x - r) / g
            nx, ny, cr = float(xt @ xt), float(yt @ yt), float(xt @ yt)
            if nx == 0.0 and ny == 0.0:
                status = "stationary" if k == 0 else "converged"
                break
            base = nx / g + g * ny
            num = base - th * cr
            V = base + c_x * nx + c_c * cr
            lam = rho if th == 2.0 else rho * V / num
            s = s + rho * (r - xbar)
            x = x + rho * xt
            if not (np.all(np.isfinite(x)) and np.all(np.isfinite(s))):
                from .errors import NumericalFailure

                raise NumericalFailure(f"non-finite iterate at iteration {k}", last_good=z, iteration=k)
            z = self.to_z(x, s)
            rp = math.sqrt(max(num, 0.0))
            lams.append(lam)
            alphas.append(rho)
            rps.append(rp)
            rds.append(math.sqrt(max(V, 0.0)))
            if its is not None:
                its.append(z)
            if fej is not None:
                fej.append(dist(z))
            if obj is not None:
                obj.append(pb.objective(x))
            tol = tol_abs
            if tol_rel:
                zp = float(z @ self.P @ z)
                tol += tol_rel * math.sqrt(max(zp, 0.0))
            if rp <= tol:
                status = "converged"
                break
        rep = SolveReport(status=status, z=z, iterations=len(lams), lam=np.array(lams), alpha=np.array(alphas),
                          res_P=np.array(rps), res_D=np.array(rds),
                          fejer=None if fej is None else np.array(fej),
                          objective=None if obj is None else np.array(obj),
                          iterates=None if its is None else np.array(its), split=n,
                          diagnostics={"certificate": self.certificate.to_dict()},
                          meta={"engine": "dr_listing", "variant": self.spec.name, "gamma": g, "theta": th,
                                "rho": rho})
        rep.meta["s"] = (x - g * rep.z[n:]).tolist()
        return rep

    def run_pd(self, x0=None, s0=None, **kwargs) -> SolveReport:
        """The same iteration through the primal-dual sweep (``L = Id``, ``mu = 0``, ``alpha = rho``)."""
        n = self.problem.dim
        x0 = np.zeros(n) if x0 is None else np.asarray(x0, dtype=float)
        s0 = x0 if s0 is None else np.asarray(s0, dtype=float)
        z0 = self.to_z(x0, s0)
        return pd_iterate(self.problem.as_saddle(), self.params, z0[:n], z0[n:], lam=self.rho, fixed_alpha=True,
                          certificate=self.certificate, **kwargs)

    def engine(self) -> EngineConfig:
        sp = self.problem.as_saddle()
        ops = sp.inclusion()
        pre = build_S_family(sp.Ld, self.params, positive_p=self.positive_p)
        if self.positive_p:
            sched = LambdaSchedule.constant(self.rho)
        else:
            sched = LambdaSchedule("fixed_alpha", self.rho)
        return EngineConfig(ops, pre, sched, self.positive_p, self.certificate.beta_P)


def _dr_atoms(D, E, F, dim):
    if isinstance(D, DRProblem):
        return D
    if dim is None:
        dim = next((a.dim for a in (D, E) if a.dim is not None), None)
        if dim is None and F is not None:
            dim = F.dim
    if dim is None:
        raise DimensionMismatch("cannot infer the dimension; pass dim")
    return DRProblem(D, E, F, int(dim))


def build_dr_forward(D, E=None, F: CocoMap | None = None, *, gamma: float, theta: float, rho: float = 1.0,
                     dim: int | None = None) -> DRSolver:
    """Douglas-Rachford iteration with a forward step on ``F``.

    ``D`` may be a :class:`DRProblem`, in which case ``E`` and ``F`` are
    taken from it.  Accepted configurations: ``F`` present with
    ``theta < 2``, ``gamma < eta (4 - theta^2)`` and
    ``rho < (4 - theta^2 - gamma/eta) / ((2 - theta)(2 + sqrt(2 - theta)))``;
    ``F = 0`` with ``theta < 2`` and ``rho < 2 - sqrt(2 - theta)``; ``F = 0``
    with ``theta = 2`` and ``rho < 2`` on the semidefinite path.  Every
    open bound on ``rho`` is applied with margin ``1e-6``.
    """
    pb = _dr_atoms(D, E, F, dim)
    gamma, theta, rho = float(gamma), float(theta), float(rho)
    base = [strict("dr_gamma_positive", gamma, 0.0), nonstrict("dr_theta_nonnegative", theta, 0.0),
            nonstrict("dr_theta_at_most_two", 2.0, theta)]
    cases = []
    if pb.F is not None:
        eta = pb.eta
        if theta < 2.0:
            rmax = (4.0 - theta ** 2 - gamma / eta) / ((2.0 - theta) * (2.0 + math.sqrt(2.0 - theta)))
        else:
            rmax = -math.inf
        beta = eta * (4.0 - theta ** 2) / (4.0 * gamma)
        cases.append(dict(case="i", beta=beta, tau=None, positive_p=False, delta=rmax,
                          lam_range=(LAMBDA_MARGIN, rmax - LAMBDA_MARGIN),
                          lam_names=("rho_above_margin", "dr_rho_bound"),
                          checks=[strict("dr_theta_below_two", 2.0, theta),
                                  strict("dr_gamma_bound", eta * (4.0 - theta ** 2), gamma,
                                         "eta (4 - theta^2) > gamma")]))
    elif theta < 2.0:
        rmax = 2.0 - math.sqrt(2.0 - theta)
        cases.append(dict(case="ii", beta=None, tau=None, positive_p=False, delta=rmax,
                          lam_range=(LAMBDA_MARGIN, rmax - LAMBDA_MARGIN),
                          lam_names=("rho_above_margin", "dr_rho_bound_no_forward"),
                          checks=[strict("dr_theta_below_two", 2.0, theta)]))
    else:
        cases.append(dict(case="iii", beta=None, tau=0.0, positive_p=True, delta=2.0,
                          lam_range=(LAMBDA_MARGIN, 2.0 - LAMBDA_MARGIN),
                          lam_names=("rho_above_margin", "dr_rho_below_two"),
                          checks=[nonstrict("dr_theta_two", theta, 2.0)]))
    cert = _select("dr_forward", cases, rho, extra_checks=base)
    cert.extras["relaxation"] = "rho"
    if not cert.positive_p:
        cert.tau = tau_of(PDParams(gamma, 1.0 / gamma, theta, 0.0), 1.0)
    spec = VariantSpec("dr_forward", {"gamma": gamma, "theta": theta, "rho": rho}, theta, 0.0, "alpha_rho", cert)
    return DRSolver(pb, gamma, theta, rho, spec)


def build_drs_classic(D, E=None, *, gamma: float, rho: float = 1.0, dim: int | None = None) -> DRSolver:
    """Classical Douglas-Rachford: ``theta = 2`` without a forward term."""
    pb = _dr_atoms(D, E, None, dim)
    if pb.F is not None:
        raise InvalidParameters("classical Douglas-Rachford has no forward term",
                                [nonstrict("drs_no_forward", 0.0, 1.0)])
    solver = build_dr_forward(pb, gamma=gamma, theta=2.0, rho=rho)
    solver.spec.name = "drs_classic"
    solver.spec.certificate.variant = "drs_classic"
    return solver


# ----------------------------------------------------------------------------
# 3-block ADMM


class StronglyConvex(ProxAtom):
    """``base(x) + (xi/2) ||x||^2`` for a prox-friendly ``base``."""

    kind = "strongly_convex"

    def __init__(self, base: ProxAtom, xi: float):
        xi = float(xi)
        if not xi > 0:
            raise ValueError("xi must be positive")
        self.base, self.xi = base, xi
        self.dim = base.dim

    def value(self, v):
        v = np.asarray(v, dtype=float)
        return self.base.value(v) + 0.5 * self.xi * float(v @ v)

    def _prox(self, gamma, v):
        s = 1.0 + gamma * self.xi
        return self.base.resolvent(gamma / s, v / s)

    def linear_argmin(self, c) -> np.ndarray:
        """``argmin_x f(x) + <c, x>``."""
        return self.base.resolvent(1.0 / self.xi, -np.asarray(c, dtype=float) / self.xi)

    def to_dict(self):
        return {"kind": "strongly_convex", "base": self.base.to_dict(), "xi": self.xi}


def _as_quadratic(atom, dim):
    if isinstance(atom, Quadratic):
        return atom.Q, atom.q
    if isinstance(atom, Zero):
        return np.zeros((dim, dim)), np.zeros(dim)
    if isinstance(atom, SqL2):
        return atom.mu * np.eye(dim), np.zeros(dim)
    raise TypeError(f"{atom.kind} is not supported here; use a quadratic or zero atom")


class Admm3Problem:
    """``min f1(x1) + f2(x2) + f3(x3)`` s.t. ``L1 x1 + L2 x2 + L3 x3 = b``.

    ``f1`` is a positive definite quadratic, ``(mu/2)||.||^2`` or a
    :class:`StronglyConvex` atom; ``f2`` and ``f3`` are quadratic (possibly
    zero).
    """

    def __init__(self, f1: ProxAtom, f2: ProxAtom, f3: ProxAtom, L1, L2, L3, b):
        self.L = [np.array(Li, dtype=float) for Li in (L1, L2, L3)]
        self.b = np.array(b, dtype=float)
        p = self.b.shape[0]
        for i, Li in enumerate(self.L, 1):
            if Li.ndim != 2 or Li.shape[0] != p:
                raise DimensionMismatch(f"L{i} must have {p} rows")
        self.dims = tuple(Li.shape[1] for Li in self.L)
        self.p = p
        self.f = [f1, f2, f3]
        n1 = self.dims[0]
        if isinstance(f1, StronglyConvex):
            self.xi = f1.xi
        else:
            Q1, _ = _as_quadratic(f1, n1)
            self.xi = float(sla.eigvalsh(Q1)[0])
        self.quads = [None] + [_as_quadratic(fi, d) for fi, d in zip(self.f[1:], self.dims[1:])]

    def sigma_min(self, i) -> float:
        return float(sla.svdvals(self.L[i])[-1]) if self.L[i].size else 0.0

    def norm_L1(self) -> float:
        return float(sla.svdvals(self.L[0])[0])

    def objective(self, xs) -> float:
        return float(sum(fi.value(xi) for fi, xi in zip(self.f, xs)))

    def constraint_residual(self, xs) -> float:
        return float(np.linalg.norm(sum(Li @ xi for Li, xi in zip(self.L, xs)) - self.b))

    def kkt_residuals(self, xs, y) -> dict:
        """Stationarity residual per block and the constraint residual."""
        out = {}
        n1 = self.dims[0]
        f1 = self.f[0]
        if isinstance(f1, StronglyConvex):
            r1 = xs[0] - f1.linear_argmin(self.L[0].T @ y)
        else:
            Q1, q1 = _as_quadratic(f1, n1)
            r1 = Q1 @ xs[0] + q1 + self.L[0].T @ y
        out["stationarity_1"] = float(np.linalg.norm(r1))
        for i in (1, 2):
            Q, q = self.quads[i]
            out[f"stationarity_{i + 1}"] = float(np.linalg.norm(Q @ xs[i] + q + self.L[i].T @ y))
        out["constraint"] = self.constraint_residual(xs)
        return out

    def split_z(self, z):
        b = np.cumsum((0,) + self.dims)
        return [z[b[i]:b[i + 1]] for i in range(3)], z[b[3]:]


class Admm3Solver(Solver):
    """Three-block ADMM derived from the Douglas-Rachford iteration on the dual.

    One iteration::

        ybar  = (theta - 1) y_n + (2 - theta) y_{n-1}
        x1+   = argmin L_0(x1, x2, x3, y_n)
        x2+   = argmin L_gamma(x1_n, x2, x3_n, ybar)
        x3+   = argmin L_gamma(x1+, x2+, x3, ybar)
        y+    = ybar + gamma (L1 x1+ + L2 x2+ + L3 x3+ - b)

    ``x1+`` and ``x2+`` do not depend on each other and may be computed in
    parallel.
    """

    def __init__(self, problem: Admm3Problem, gamma: float, theta: float, spec: VariantSpec, parallel: bool = False):
        self.problem = problem
        self.gamma = float(gamma)
        self.theta = float(theta)
        self.spec = spec
        self.parallel = parallel
        self.split = sum(problem.dims)
        pb, g = problem, self.gamma
        self._fac = {}
        for i in (1, 2):
            Q, _ = pb.quads[i]
            self._fac[i] = sla.cho_factor(Q + g * pb.L[i].T @ pb.L[i])
        f1 = pb.f[0]
        if not isinstance(f1, StronglyConvex):
            Q1, q1 = _as_quadratic(f1, pb.dims[0])
            self._f1 = (sla.cho_factor(Q1), q1)

    def _x1(self, y):
        pb = self.problem
        c = pb.L[0].T @ y
        f1 = pb.f[0]
        if isinstance(f1, StronglyConvex):
            return f1.linear_argmin(c)
        fac, q1 = self._f1
        return sla.cho_solve(fac, -q1 - c)

    def _xi(self, i, ybar, rest):
        pb, g = self.problem, self.gamma
        _, q = pb.quads[i]
        Li = pb.L[i]
        rhs = -q - Li.T @ ybar - g * (Li.T @ (rest - pb.b))
        return sla.cho_solve(self._fac[i], rhs)

    def step(self, xs, y, y_prev, pool=None):
        pb, g, th = self.problem, self.gamma, self.theta
        ybar = (th - 1.0) * y + (2.0 - th) * y_prev
        if pool is not None:
            fut = pool.submit(self._x1, y)
            x2 = self._xi(1, ybar, pb.L[0] @ xs[0] + pb.L[2] @ xs[2])
            x1 = fut.result()
        else:
            x1 = self._x1(y)
            x2 = self._xi(1, ybar, pb.L[0] @ xs[0] + pb.L[2] @ xs[2])
        x3 = self._xi(2, ybar, pb.L[0] @ x1 + pb.L[1] @ x2)
        y_new = ybar + g * (pb.L[0] @ x1 + pb.L[1] @ x2 + pb.L[2] @ x3 - pb.b)
        return [x1, x2, x3], y_new

    def run(self, x0=None, y0=None, y1=None, *, max_iter: int = 50_000, tol_abs: float = 1e-10,
            tol_rel: float = 0.0, record: bool = False, objective: bool = False, z_star=None) -> SolveReport:
        """Iterate from ``x0 = (x1, x2, x3)`` with ``y_{n-1} = y0`` and ``y_n = y1``.

        ``y1`` defaults to ``y0``.  ``res_P`` is the Euclidean length of the
        change in ``(x1, x2, x3, y)`` and ``res_D`` the constraint residual.
        """
        pb = self.problem
        xs = [np.zeros(d) for d in pb.dims] if x0 is None else [np.array(v, dtype=float) for v in x0]
        y_prev = np.zeros(pb.p) if y0 is None else np.array(y0, dtype=float)
        y = y_prev.copy() if y1 is None else np.array(y1, dtype=float)
        z = np.concatenate(xs + [y])
        its = [z] if record else None
        obj = [pb.objective(xs)] if objective else None
        fej = None
        if z_star is not None:
            zs = np.asarray(z_star, dtype=float)
            fej = [float(np.linalg.norm(z - zs))]
        rps, rds = [], []
        status = "max_iter"
        pool = ThreadPoolExecutor(max_workers=1) if self.parallel else None
        try:
            for k in range(max_iter):
                xs_new, y_new = self.step(xs, y, y_prev, pool)
                z_new = np.concatenate(xs_new + [y_new])
                if not np.all(np.isfinite(z_new)):
                    from .errors import NumericalFailure

                    raise NumericalFailure(f"non-finite iterate at iteration {k}", last_good=z, iteration=k)
                rp = float(np.linalg.norm(z_new - z))
                if rp == 0.0 and k == 0 and np.array_equal(y, y_prev):
                    status = "stationary"
                    break
                xs, y_prev, y, z = xs_new, y, y_new, z_new
                rps.append(rp)
                rds.append(pb.constraint_residual(xs))
                if its is not None:
                    its.append(z)
                if obj is not None:
                    obj.append(pb.objective(xs))
                if fej is not None:
                    fej.append(float(np.linalg.norm(z - zs)))
                if rp <= tol_abs + tol_rel * float(np.linalg.norm(z)):
                    status = "converged"
                    break
        finally:
            if pool is not None:
                pool.shutdown()
        N = len(rps)
        return SolveReport(status=status, z=z, iterations=N, lam=np.ones(N), alpha=np.ones(N),
                           res_P=np.array(rps), res_D=np.array(rds),
                           fejer=None if fej is None else np.array(fej),
                           objective=None if obj is None else np.array(obj),
                           iterates=None if its is None else np.array(its), split=self.split,
                           diagnostics={"certificate": self.certificate.to_dict()},
                           meta={"engine": "admm3", "variant": "admm3", "gamma": self.gamma, "theta": self.theta,
                                 "res_P": "change in (x1, x2, x3, y)", "res_D": "constraint residual"})


def build_admm3(p: Admm3Problem, gamma: float, theta: float, parallel: bool = False) -> Admm3Solver:
    """Three-block ADMM for ``theta`` in ``(1, 2)`` and
    ``gamma < xi (2 - theta)(theta - sqrt(2 - theta)) / ||L1||^2``."""
    gamma, theta = float(gamma), float(theta)
    nL1 = p.norm_L1()
    bound = p.xi * (2.0 - theta) * (theta - math.sqrt(max(2.0 - theta, 0.0))) / nL1 ** 2 if nL1 > 0 else math.inf
    checks = [
        strict("admm_theta_above_one", theta, 1.0),
        strict("admm_theta_below_two", 2.0, theta),
        strict("admm_xi_positive", p.xi, 0.0),
        strict("admm_gamma_positive", gamma, 0.0),
        strict("admm_gamma_bound", bound, gamma, "xi (2 - theta)(theta - sqrt(2 - theta)) / ||L1||^2 > gamma"),
        strict("admm_L2_injective", p.sigma_min(1), RANK_FLOOR),
        strict("admm_L3_injective", p.sigma_min(2), RANK_FLOOR),
    ]
    require(checks, "admm3")
    cert = Certificate(variant="admm3", case="admm", tau=None, beta_P=None, delta=1.0, lam_range=(1.0, 1.0),
                       inequalities=checks, extras={"gamma_bound": bound, "xi": p.xi,
                                                    "case_inequalities": tuple(q.name for q in checks)})
    spec = VariantSpec("admm3", {"gamma": gamma, "theta": theta}, theta, 0.0, "alpha_rho", cert)
    return Admm3Solver(p, gamma, theta, spec, parallel=parallel)


# ----------------------------------------------------------------------------
# forward-backward family


def _dim_of(A, C, dim):
    if dim is not None:
        return int(dim)
    if A.dim is not None:
        return A.dim
    if C is not None:
        return C.dim
    raise DimensionMismatch("cannot infer the dimension; pass dim")


class FBSolver(Solver):
    """``z+ = z + lam (J_{gamma A}(z - gamma C z) - z)`` (``H = Id/gamma``, ``S = Id``)."""

    def __init__(self, A: ProxAtom, C: CocoMap | None, gamma: float, lam: float, dim: int, spec: VariantSpec):
        self.A, self.C = A, C
        self.gamma, self.lam, self.dim = float(gamma), float(lam), dim
        self.spec = spec

    @property
    def fejer_metric(self):
        return np.eye(self.dim)

    @property
    def P(self):
        return np.eye(self.dim) / self.gamma

    @property
    def D(self):
        return np.eye(self.dim) / self.gamma ** 2

    def run(self, z0=None, *, max_iter: int = 100_000, tol_abs: float = 1e-10, tol_rel: float = 0.0,
            z_star=None, record: bool = False, objective: Callable | None = None) -> SolveReport:
        g, lam = self.gamma, self.lam
        z = np.zeros(self.dim) if z0 is None else np.array(z0, dtype=float)
        zs = None if z_star is None else np.asarray(z_star, dtype=float)
        its = [z] if record else None
        fej = [float(np.linalg.norm(z - zs))] if zs is not None else None
        obj = [objective(z)] if objective is not None else None
        rps, rds = [], []
        status = "max_iter"
        sg = math.sqrt(g)
        for k in range(max_iter):
            v = z if self.C is None else z - g * self.C(z)
            zt = self.A.resolvent(g, v) - z
            nz = float(np.linalg.norm(zt))
            if nz == 0.0:
                status = "stationary" if k == 0 else "converged"
                break
            z = z + lam * zt
            rps.append(nz / sg)
            rds.append(nz / g)
            if its is not None:
                its.append(z)
            if fej is not None:
                fej.append(float(np.linalg.norm(z - zs)))
            if obj is not None:
                obj.append(objective(z))
            if nz / sg <= tol_abs + tol_rel * float(np.linalg.norm(z)) / sg:
                status = "converged"
                break
        N = len(rps)
        return SolveReport(status=status, z=z, iterations=N, lam=np.full(N, lam), alpha=np.full(N, lam * g),
                           res_P=np.array(rps), res_D=np.array(rds),
                           fejer=None if fej is None else np.array(fej),
                           objective=None if obj is None else np.array(obj),
                           iterates=None if its is None else np.array(its),
                           diagnostics={"certificate": self.certificate.to_dict()},
                           meta={"engine": "fbs_listing", "variant": self.spec.name, "gamma": g})

    def engine(self) -> EngineConfig:
        n = self.dim
        ops = Inclusion(BlockAtom([(self.A, n)]), np.zeros((n, n)), self.C)
        pre = PreconditionerTriple(np.eye(n) / self.gamma, (n,), S=np.eye(n))
        beta = None if self.C is None else self.C.beta / self.gamma
        return EngineConfig(ops, pre, LambdaSchedule.constant(self.lam), False, beta)


def build_fbs(A: ProxAtom, C: CocoMap, gamma: float, lam: float, dim: int | None = None) -> FBSolver:
    """Forward-backward splitting for ``gamma`` in ``(0, 4 beta)`` and
    ``lam`` in ``[1e-6, 2 - gamma/(2 beta) - 1e-6]``."""
    if C is not None and C.is_zero:
        C = None
    if C is None:
        return build_ppa(A, gamma, lam, dim)
    n = _dim_of(A, C, dim)
    gamma = float(gamma)
    beta = C.beta
    checks = [strict("fbs_gamma_positive", gamma, 0.0),
              strict("fbs_gamma_below_4beta", 4.0 * beta, gamma, "gamma < 4 beta")]
    delta = 2.0 - gamma / (2.0 * beta)
    cases = [dict(case="fbs", beta=beta / gamma, tau=1.0 / gamma, positive_p=False, delta=delta, checks=checks)]
    cert = _select("fbs", cases, lam)
    cert.c1 = cert.c2 = 1.0 / gamma
    cert.rate_eligible = True
    spec = VariantSpec("fbs", {"gamma": gamma, "lam": lam}, None, None, "constant", cert)
    return FBSolver(A, C, gamma, lam, n, spec)


def build_ppa(A: ProxAtom, gamma: float, lam: float, dim: int | None = None) -> FBSolver:
    """Proximal point iteration, ``lam`` in ``[1e-6, 2 - 1e-6]``."""
    n = _dim_of(A, None, dim)
    gamma = float(gamma)
    cases = [dict(case="ppa", beta=None, tau=1.0 / gamma, positive_p=False, delta=2.0,
                  checks=[strict("ppa_gamma_positive", gamma, 0.0)])]
    cert = _select("ppa", cases, lam)
    cert.c1 = cert.c2 = 1.0 / gamma
    cert.rate_eligible = True
    spec = VariantSpec("ppa", {"gamma": gamma, "lam": lam}, None, None, "constant", cert)
    return FBSolver(A, None, gamma, lam, n, spec)


class FBFSSolver(Solver):
    """``zbar = J_{gamma A}(z - gamma M z - gamma C z)``, ``z+ = zbar - gamma M (zbar - z)``."""

    def __init__(self, A: ProxAtom, M: np.ndarray, C: CocoMap | None, gamma: float, dim: int, spec: VariantSpec):
        self.A, self.M, self.C = A, M, C
        self.gamma, self.dim = float(gamma), dim
        self.spec = spec

    @property
    def fejer_metric(self):
        return np.eye(self.dim)

    def run(self, z0=None, *, max_iter: int = 10_000, tol_abs: float = 1e-10, tol_rel: float = 0.0,
            z_star=None, record: bool = False, objective: Callable | None = None) -> SolveReport:
        g, M = self.gamma, self.M
        z = np.zeros(self.dim) if z0 is None else np.array(z0, dtype=float)
        zs = None if z_star is None else np.asarray(z_star, dtype=float)
        its = [z] if record else None
        fej = [float(np.linalg.norm(z - zs))] if zs is not None else None
        obj = [objective(z)] if objective is not None else None
        lams, rps, rds = [], [], []
        status = "max_iter"
        sg = math.sqrt(g)
        for k in range(max_iter):
            v = z - g * (M @ z)
            if self.C is not None:
                v = v - g * self.C(z)
            zbar = self.A.resolvent(g, v)
            zt = zbar - z
            nz = float(np.linalg.norm(zt))
            if nz == 0.0:
                status = "stationary" if k == 0 else "converged"
                break
            Mzt = M @ zt
            lams.append(1.0 + (g * float(np.linalg.norm(Mzt)) / nz) ** 2)
            z = zbar - g * Mzt
            rps.append(nz / sg)
            rds.append(float(np.linalg.norm(zt / g - Mzt)))
            if its is not None:
                its.append(z)
            if fej is not None:
                fej.append(float(np.linalg.norm(z - zs)))
            if obj is not None:
                obj.append(objective(z))
            if nz / sg <= tol_abs + tol_rel * float(np.linalg.norm(z)) / sg:
                status = "converged"
                break
        N = len(rps)
        return SolveReport(status=status, z=z, iterations=N, lam=np.array(lams), alpha=np.full(N, g),
                           res_P=np.array(rps), res_D=np.array(rds),
                           fejer=None if fej is None else np.array(fej),
                           objective=None if obj is None else np.array(obj),
                           iterates=None if its is None else np.array(its),
                           diagnostics={"certificate": self.certificate.to_dict()},
                           meta={"engine": "fbfs_listing", "variant": "fbfs", "gamma": g})

    def engine(self) -> EngineConfig:
        n = self.dim
        ops = Inclusion(BlockAtom([(self.A, n)]), self.M, self.C)
        pre = PreconditionerTriple(np.eye(n) / self.gamma, (n,), S=np.eye(n))
        beta = None if self.C is None else self.C.beta / self.gamma
        return EngineConfig(ops, pre, LambdaSchedule("fbfs", gamma=self.gamma), False, beta)


def build_fbfs(A: ProxAtom, M, C: CocoMap | None = None, gamma: float = 1.0, dim: int | None = None) -> FBFSSolver:
    """Forward-backward-forward type iteration with step size ``gamma``.

    ``M`` must be skew.  The implied relaxation
    ``lam_n = 1 + (gamma ||M zt|| / ||zt||)^2`` lies in
    ``[1, 1 + gamma^2 ||M||^2]``, so the admitted range is
    ``1 + gamma^2 ||M||^2 <= 2 - gamma/(2 beta) - 1e-6`` (``beta = inf``
    without ``C``).
    """
    M = np.array(M, dtype=float)
    if C is not None and C.is_zero:
        C = None
    n = _dim_of(A, C, dim if dim is not None else M.shape[0])
    if M.shape != (n, n):
        raise DimensionMismatch(f"M must be {n}x{n}")
    gamma = float(gamma)
    scale = max(1.0, float(np.abs(M).max(initial=0.0)))
    asym = float(np.abs(M + M.T).max(initial=0.0))
    nM = float(sla.svdvals(M)[0]) if n else 0.0
    beta = math.inf if C is None else C.beta
    delta = 2.0 - gamma / (2.0 * beta)
    checks = [nonstrict("fbfs_M_skew", 1e-12 * scale, asym, "M + M* = 0"),
              strict("fbfs_gamma_positive", gamma, 0.0),
              nonstrict("fbfs_gamma_bound", delta - LAMBDA_MARGIN, 1.0 + gamma ** 2 * nM ** 2,
                        "1 + gamma^2 ||M||^2 <= 2 - gamma/(2 beta) - 1e-6")]
    cases = [dict(case="fbfs", beta=None if C is None else beta / gamma, tau=1.0 / gamma, positive_p=False,
                  delta=delta, checks=checks[1:])]
    cert = _select("fbfs", cases, extra_checks=checks[:1])
    cert.extras["lambda_max"] = 1.0 + gamma ** 2 * nM ** 2
    spec = VariantSpec("fbfs", {"gamma": gamma}, None, None, "fbfs", cert)
    return FBFSSolver(A, M, C, gamma, n, spec)


# ----------------------------------------------------------------------------
# registry and defaults

BUILDERS: dict[str, Callable] = {
    "primal_dual": build_primal_dual,
    "condat_vu": build_condat_vu,
    "bac": build_bac,
    "dst": build_dst,
    "mu0": build_mu0,
    "dr_forward": build_dr_forward,
    "drs_classic": build_drs_classic,
    "admm3": build_admm3,
    "fbs": build_fbs,
    "ppa": build_ppa,
    "fbfs": build_fbfs,
}

VARIANT_NAMES = tuple(BUILDERS)

#: presets that take a :class:`SaddleProblem`
PD_VARIANTS = ("primal_dual", "condat_vu", "bac", "dst", "mu0", "dr_forward", "drs_classic")


def default_params(name: str, problem: SaddleProblem) -> dict:
    """Parameters that a preset accepts on ``problem``, found by step-size halving.

    Starts from ``gamma2 = 1/||L||`` and ``gamma1`` at the edge of the
    relevant bound, then halves ``gamma1`` until the builder accepts.  The
    returned dictionary may still be rejected by the builder when no
    step size works (for instance ``mu0`` with a smooth term).
    """
    nL = problem.norm_L if problem.norm_L > 0 else 1.0
    if name in ("dr_forward", "drs_classic"):
        p = {"gamma": 1.0, "rho": 1.0}
        if name == "dr_forward":
            p.update(theta=2.0 if problem.h is None else 1.5)
            if problem.h is not None:
                # gamma = eta with theta = 1.5 leaves room for rho near 0.57
                p["gamma"] = 1.0 / max(problem.beta_h, 1e-12)
                th = p["theta"]
                rmax = (4 - th ** 2 - 1.0) / ((2 - th) * (2 + math.sqrt(2 - th)))
                p["rho"] = 0.9 * rmax
        return p
    g2 = 1.0 / nL
    extra = max(problem.beta_h, problem.beta_l)
    g1 = 0.99 / (g2 * nL ** 2 + extra) if extra > 0 else 0.99 / (g2 * nL ** 2)
    base = {"primal_dual": {"theta": 1.0, "mu": 0.5}, "mu0": {"theta": 1.5}}.get(name, {})
    last = None
    for _ in range(60):
        p = {"gamma1": g1, "gamma2": g2, **base}
        try:
            solver = BUILDERS[name](problem, **p)
        except InvalidParameters as exc:
            last = exc
            if name == "mu0" and "mu0_structure" in exc.failed_names:
                break
            g1 *= 0.5
            continue
        if name in ("condat_vu", "primal_dual"):
            delta = solver.certificate.delta
            lam = 1.0 if delta - LAMBDA_MARGIN >= 1.0 else 0.5 * delta
            p["lam"] = lam
        return p
    p = {"gamma1": g1, "gamma2": g2, **base}
    if last is not None:
        p["_rejected"] = last
    return p
