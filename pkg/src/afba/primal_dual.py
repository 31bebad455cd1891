"""Primal-dual instances for ``min f(x) + h(x) + (g box l)(Lx)``.

The optimality system is the inclusion ``0 in A z + M z + C z`` on
``z = (x, y)`` with ``A = (df, dg*)``, ``M = (L*y, -Lx)`` and
``C = (grad h, grad l*)``.  The preconditioner family is parametrized by
step sizes ``gamma1, gamma2``, a coupling ``theta >= 0`` and a metric
blend ``mu in [0, 1]``::

    H = [[ I/gamma1,         0 ],      P = [[ I/gamma1,        -theta/2 L* ],
         [ -theta L,  I/gamma2 ]]           [ -theta/2 L,        I/gamma2 ]]

One iteration computes the two proximal steps::

    xbar = prox_{gamma1 f}(x - gamma1 L*y - gamma1 grad h(x))
    ybar = prox_{gamma2 g*}(y + gamma2 L((1-theta) x + theta xbar) - gamma2 grad l*(y))

and moves along the closed-form direction
``(xt - mu gamma1 (2-theta) L*yt, gamma2 (1-mu)(2-theta) L xt + yt)`` with
step ``alpha = lam ||zt||_P^2 / ||zt||_D^2``.

Role-swapped instances (dual step first) follow by exchanging the roles of
``(f, h)`` and ``(g, l)`` and replacing ``L`` by ``-L*``; they are not
built separately.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from . import kernels
from .atoms import BlockAtom, CocoMap, Conjugate, ProxAtom, Zero, atom_from_dict, moreau_conjugate_prox
from .engine import AFBA, Inclusion, LambdaSchedule, PreconditionerTriple
from .errors import DimensionMismatch, InvalidParameters, InvariantViolation, NumericalFailure
from .linops import DenseMap, LinearMap, as_map, op_norm, skew_map
from .report import SolveReport
from .validity import LAMBDA_MARGIN, Certificate, nonstrict, strict

__all__ = [
    "SaddleProblem",
    "PDParams",
    "ValidityCertificate",
    "tau_of",
    "beta_of",
    "validate",
    "build_S_family",
    "alpha_pd",
    "pd_iterate",
    "pd_matrices",
    "engine_setup",
    "NORM_PAD",
]

#: relative padding applied to power-iteration norm estimates
NORM_PAD = 1e-6

ValidityCertificate = Certificate


class SaddleProblem:
    """``min_x f(x) + h(x) + (g box l)(L x)``.

    Parameters
    ----------
    f : ProxAtom
        Primal nonsmooth term on ``R^n``.
    g : ProxAtom
        Nonsmooth term on ``R^m``; only its conjugate's resolvent is used.
    L : array_like or LinearMap, shape (m, n)
    h : CocoMap, optional
        Gradient of the smooth primal term; ``None`` encodes ``h = 0``.
    l_mu : float, optional
        ``l = (l_mu / 2) ||.||^2``; ``None`` encodes ``l`` as the
        indicator of ``{0}``, so that ``g box l = g``.
    norm_L : float, optional
        Certified upper bound on ``||L||``.  Defaults to the power
        iteration estimate padded by :data:`NORM_PAD`.
    seed : int
        Seed for the power iteration.
    """

    def __init__(self, f: ProxAtom, g: ProxAtom, L, h: CocoMap | None = None, l_mu: float | None = None,
                 norm_L: float | None = None, seed: int = 0):
        self.L = as_map(L)
        self.m, self.n = self.L.shape
        for name, atom, d in (("f", f, self.n), ("g", g, self.m)):
            if atom.dim is not None and atom.dim != d:
                raise DimensionMismatch(f"{name} has dimension {atom.dim}, expected {d}")
        self.f, self.g = f, g
        if h is not None and h.is_zero:
            h = None
        if h is not None and h.dim != self.n:
            raise DimensionMismatch(f"grad h acts on length {h.dim}, expected {self.n}")
        self.h = h
        if l_mu is not None:
            l_mu = float(l_mu)
            if not l_mu > 0:
                raise ValueError("l_mu must be positive")
        self.l_mu = l_mu
        self.Ld = self.L.dense()
        if norm_L is None:
            est = op_norm(self.L, seed=seed)
            norm_L = est * (1.0 + NORM_PAD)
            self.norm_source = "power_iteration"
        else:
            norm_L = float(norm_L)
            self.norm_source = "user"
        self.norm_L = norm_L

    @property
    def beta_h(self) -> float:
        """Lipschitz constant of ``grad h`` (``0`` when ``h = 0``)."""
        return 0.0 if self.h is None else self.h.lipschitz

    @property
    def beta_l(self) -> float:
        """Lipschitz constant of ``grad l*`` (``0`` when ``l`` is the indicator of ``{0}``)."""
        return 0.0 if self.l_mu is None else 1.0 / self.l_mu

    @property
    def dim(self) -> int:
        return self.n + self.m

    def grad_h(self, x):
        return np.zeros(self.n) if self.h is None else self.h(x)

    def grad_lconj(self, y):
        return np.zeros(self.m) if self.l_mu is None else np.asarray(y, dtype=float) / self.l_mu

    def objective(self, x) -> float:
        """``f(x) + h(x) + (g box l)(Lx)``."""
        x = np.asarray(x, dtype=float)
        u = self.Ld @ x
        val = self.f.value(x)
        if self.h is not None:
            val += self.h.value(x)
        if self.l_mu is None:
            val += self.g.value(u)
        else:
            p = self.g.resolvent(1.0 / self.l_mu, u)
            val += self.g.value(p) + 0.5 * self.l_mu * float(np.dot(u - p, u - p))
        return float(val)

    def residual(self, x, y) -> tuple[float, float]:
        """Prox-based optimality residuals of ``(x, y)``.

        ``||x - prox_f(x - L*y - grad h(x))||`` and
        ``||y - prox_{g*}(y + Lx - grad l*(y))||``; both vanish exactly at
        primal-dual solutions.
        """
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        rx = x - self.f.resolvent(1.0, x - self.Ld.T @ y - self.grad_h(x))
        ry = y - moreau_conjugate_prox(self.g, 1.0, y + self.Ld @ x - self.grad_lconj(y))
        return float(np.linalg.norm(rx)), float(np.linalg.norm(ry))

    def inclusion(self) -> Inclusion:
        A = BlockAtom([(self.f, self.n), (Conjugate(self.g), self.m)])
        M = skew_map(self.L).dense()
        parts = [self.h or CocoMap.zero(self.n),
                 CocoMap.zero(self.m) if self.l_mu is None else CocoMap.scaled(self.l_mu, self.m)]
        C = CocoMap.product(parts)
        return Inclusion(A, M, C)

    def to_dict(self) -> dict:
        d = {
            "space": {"n": self.n, "m": self.m},
            "atoms": {
                "f": self.f.to_dict(),
                "g": self.g.to_dict(),
                "h": {"kind": "zero"} if self.h is None else self.h.to_dict(),
                "l": {"kind": "zero_indicator"} if self.l_mu is None else {"kind": "sq_l2", "mu": self.l_mu},
            },
            "operator": {"L": self.Ld.tolist()},
        }
        if self.norm_source == "user":
            d["operator"]["norm"] = self.norm_L
        return d

    @classmethod
    def from_dict(cls, d: dict, seed: int = 0) -> SaddleProblem:
        n, m = int(d["space"]["n"]), int(d["space"]["m"])
        L = np.array(d["operator"]["L"], dtype=float).reshape(m, n)
        atoms = d["atoms"]
        f = atom_from_dict(atoms["f"], n)
        g = atom_from_dict(atoms["g"], m)
        h = _coco_from_dict(atoms.get("h", {"kind": "zero"}), n)
        ld = atoms.get("l", {"kind": "zero_indicator"})
        l_mu = None if ld["kind"] == "zero_indicator" else float(ld["mu"])
        return cls(f, g, L, h=h, l_mu=l_mu, norm_L=d["operator"].get("norm"), seed=seed)

    def __repr__(self):
        return (f"SaddleProblem(n={self.n}, m={self.m}, f={self.f.kind}, g={self.g.kind}, "
                f"h={'0' if self.h is None else self.h.kind}, l={'iota0' if self.l_mu is None else self.l_mu})")


def _coco_from_dict(d: dict, dim: int) -> CocoMap | None:
    kind = d.get("kind", "zero")
    if kind == "zero":
        return None
    if kind == "lsq":
        return CocoMap.affine_gradient(d["A"], d["b"])
    if kind == "affine":
        return CocoMap.affine(d["G"], d.get("c"))
    if kind == "sq_l2":
        return CocoMap.scaled(d["mu"], dim)
    raise ValueError(f"unknown smooth term kind {kind!r}")


@dataclass(frozen=True)
class PDParams:
    """Step sizes ``gamma1, gamma2 > 0``, coupling ``theta >= 0`` and blend ``mu in [0, 1]``."""

    gamma1: float
    gamma2: float
    theta: float
    mu: float = 1.0

    def __post_init__(self):
        for name in ("gamma1", "gamma2"):
            v = getattr(self, name)
            if not (v > 0 and math.isfinite(v)):
                raise InvalidParameters(f"{name} must be positive", [strict(f"{name}_positive", v, 0.0)])
        if not self.theta >= 0:
            raise InvalidParameters("theta must be nonnegative", [nonstrict("theta_nonnegative", self.theta, 0.0)])
        if not 0.0 <= self.mu <= 1.0:
            raise InvalidParameters("mu must lie in [0, 1]", [nonstrict("mu_in_unit_interval", min(self.mu, 1 - self.mu), 0.0)])


def tau_of(params: PDParams, norm_L: float) -> float:
    """Strong positivity constant of ``P``.

    ``(1/gamma1 + 1/gamma2)/2 - sqrt(theta^2 ||L||^2 + (1/gamma1 - 1/gamma2)^2)/2``.
    May be zero or negative; callers decide what that means.
    """
    a, b = 1.0 / params.gamma1, 1.0 / params.gamma2
    return 0.5 * (a + b) - 0.5 * math.sqrt(params.theta ** 2 * norm_L ** 2 + (a - b) ** 2)


def _positivity_gap(params, norm_L):
    return 1.0 / params.gamma1 - 0.25 * params.gamma2 * params.theta ** 2 * norm_L ** 2


def beta_of(problem: SaddleProblem, params: PDParams, tau: float | None = None) -> float | None:
    """Cocoercivity constant of ``C`` in the ``P`` metric; ``None`` when ``C = 0``."""
    if problem.h is None and problem.l_mu is None:
        return None
    if problem.l_mu is None:
        return _positivity_gap(params, problem.norm_L) / problem.beta_h
    if tau is None:
        tau = tau_of(params, problem.norm_L)
    inv = [1.0 / b for b in (problem.beta_h, problem.beta_l) if b > 0]
    return tau * min(inv)


def _delta(beta):
    return 2.0 if beta is None else 2.0 - 1.0 / (2.0 * beta)


def _lam_checks(lam, lo_hi, names=("lambda_above_margin", "lambda_below_delta")):
    lo, hi = lo_hi
    return [nonstrict(names[0], lam, lo), nonstrict(names[1], hi, lam)]


def _select(variant, cases, lam=None, extra_checks=()):
    """Pick the holding case with the largest delta and check ``lam`` against it.

    ``cases`` is a list of dicts with keys ``case``, ``checks``, ``beta``,
    ``tau``, ``positive_p`` and optionally ``delta``, ``lam_range`` and
    ``lam_names`` (names of the lower and upper relaxation checks).
    """
    everything = list(extra_checks)
    for c in cases:
        everything.extend(c["checks"])
    if extra_checks and not all(q.holds for q in extra_checks):
        raise InvalidParameters(f"{variant}: structural conditions failed", everything)
    good = []
    for c in cases:
        if all(q.holds for q in c["checks"]):
            delta = c.get("delta", _delta(c["beta"]))
            if delta <= 0:
                continue
            c = dict(c, delta=delta)
            c.setdefault("lam_range", (LAMBDA_MARGIN, delta - LAMBDA_MARGIN))
            good.append(c)
    if not good:
        names = sorted({q.name for q in everything if not q.holds})
        raise InvalidParameters(f"{variant}: no sufficient condition holds (failed: {', '.join(names)})", everything)
    best = max(good, key=lambda c: (c["delta"], not c["positive_p"]))
    lam_checks = []
    if lam is not None:
        lam_checks = _lam_checks(lam, best["lam_range"], best.get("lam_names", ("lambda_above_margin",
                                                                                 "lambda_below_delta")))
        everything.extend(lam_checks)
        if not all(q.holds for q in lam_checks):
            raise InvalidParameters(
                f"{variant}: relaxation {lam} outside [{best['lam_range'][0]:.6g}, {best['lam_range'][1]:.6g}]",
                everything)
    return Certificate(
        variant=variant,
        case=best["case"],
        tau=best["tau"],
        beta_P=best["beta"],
        delta=best["delta"],
        lam_range=tuple(best["lam_range"]),
        inequalities=everything,
        positive_p=best["positive_p"],
        extras={"case_inequalities": tuple(q.name for q in best["checks"])},
    )


_GENERIC_NAMES = {"iii": "no_forward_positivity", "ii": "cocoercivity_l_zero"}


def _pd_cases(problem: SaddleProblem, params: PDParams, names=None):
    names = names or _GENERIC_NAMES
    nL = problem.norm_L
    gap = _positivity_gap(params, nL)
    tau = tau_of(params, nL)
    has_h, has_l = problem.h is not None, problem.l_mu is not None
    cases = []
    if not has_h and not has_l:
        cases.append(dict(case="iii", beta=None, tau=tau, positive_p=False,
                          checks=[strict(names["iii"], gap, 0.0,
                                         "1/gamma1 - gamma2 theta^2 ||L||^2 / 4 > 0")]))
        if params.theta == 2.0:
            cases.append(dict(case="iv", beta=None, tau=max(tau, 0.0), positive_p=True, delta=2.0,
                              checks=[nonstrict("gamma1_inv_minus_gamma2_L2_psd",
                                                1.0 / params.gamma1 - params.gamma2 * nL ** 2, 0.0,
                                                "1/gamma1 - gamma2 ||L||^2 >= 0 (semidefinite P)")]))
        return cases
    if not has_l:
        cases.append(dict(case="ii", beta=gap / problem.beta_h if gap > 0 else None, tau=tau, positive_p=False,
                          checks=[strict(names["ii"], gap, problem.beta_h / 4.0,
                                         "1/gamma1 - gamma2 theta^2 ||L||^2 / 4 > beta_h / 4")]))
    inv = [1.0 / b for b in (problem.beta_h, problem.beta_l) if b > 0]
    beta = tau * min(inv)
    cases.append(dict(case="i", beta=beta if tau > 0 else None, tau=tau, positive_p=False,
                      checks=[strict("strong_positivity_P", gap, 0.0, "1/gamma1 - gamma2 theta^2 ||L||^2 / 4 > 0"),
                              strict("cocoercivity_general", 4.0 * tau * min(inv), 1.0,
                                     "4 tau min(1/beta_h, 1/beta_l) > 1")]))
    return cases


def validate(problem: SaddleProblem, params: PDParams, lam: float | None = None,
             variant: str = "primal_dual") -> Certificate:
    """Certify ``(problem, params, lam)`` for the primal-dual iteration.

    Evaluates every applicable sufficient condition, keeps those that hold,
    selects the one with the largest relaxation bound ``delta`` and checks
    the constant relaxation ``lam`` against it (``None`` skips that check).

    Raises
    ------
    InvalidParameters
        Listing every evaluated inequality with its margin.
    """
    cert = _select(variant, _pd_cases(problem, params), lam)
    _attach_sandwich(cert, problem, params, lam)
    return cert


def _attach_sandwich(cert, problem, params, lam):
    if cert.positive_p:
        return
    from .diagnostics import sandwich_constants

    mats = pd_matrices(problem.Ld, params)
    try:
        c1, c2 = sandwich_constants(mats["P"], mats["D"])
    except ValueError:
        return
    cert.c1, cert.c2 = c1, c2
    cap = c1 * cert.delta / c2
    cert.extras["monotone_lambda_cap"] = cap
    cert.rate_eligible = lam is not None and lam <= cap


def pd_matrices(L, params: PDParams) -> dict:
    """Dense ``H, P, K, M, S1, S2, S, D1, D2, D`` of the family.

    ``S`` and ``D`` blend ``S1, S2`` and ``D1, D2`` with weight ``mu``;
    ``S`` is omitted when it is not invertible.
    """
    L = np.asarray(L.dense() if isinstance(L, LinearMap) else L, dtype=float)
    m, n = L.shape
    g1, g2, th, mu = params.gamma1, params.gamma2, params.theta, params.mu
    In, Im = np.eye(n), np.eye(m)
    Z = np.zeros((n, m))
    H = np.block([[In / g1, Z], [-th * L, Im / g2]])
    P = np.block([[In / g1, -0.5 * th * L.T], [-0.5 * th * L, Im / g2]])
    K = np.block([[np.zeros((n, n)), 0.5 * th * L.T], [-0.5 * th * L, np.zeros((m, m))]])
    M = np.block([[np.zeros((n, n)), L.T], [-L, np.zeros((m, m))]])
    S1 = np.block([[In / g1, (1 - th) * L.T], [(1 - th) * L, Im / g2 + g1 * (1 - th) * (2 - th) * L @ L.T]])
    S2 = np.block([[In / g1 + g2 * (2 - th) * L.T @ L, -L.T], [-L, Im / g2]])
    D1 = np.block([[In / g1, -L.T], [-L, Im / g2 + g1 * (2 - th) * L @ L.T]])
    D2 = np.block([[In / g1 + g2 * (1 - th) * (2 - th) * L.T @ L, (1 - th) * L.T], [(1 - th) * L, Im / g2]])
    D = mu * D1 + (1 - mu) * D2
    out = dict(H=H, P=P, K=K, M=M, S1=S1, S2=S2, D1=D1, D2=D2, D=D)
    if mu == 1.0:
        out["S"] = S1
    elif mu == 0.0:
        out["S"] = S2
    else:
        try:
            Sinv = mu * np.linalg.inv(S1) + (1 - mu) * np.linalg.inv(S2)
            S = np.linalg.inv(Sinv)
            out["S"] = 0.5 * (S + S.T)
        except np.linalg.LinAlgError:
            pass
    return out


def _direction(L, params):
    g1, g2, th, mu = params.gamma1, params.gamma2, params.theta, params.mu
    L = np.asarray(L, dtype=float)
    m, n = L.shape
    cx = mu * g1 * (2 - th)
    cy = g2 * (1 - mu) * (2 - th)

    def direction(zt):
        xt, yt = zt[:n], zt[n:]
        return np.concatenate([xt - cx * (L.T @ yt), cy * (L @ xt) + yt])

    return direction


def build_S_family(L, params: PDParams, positive_p: bool = False) -> PreconditionerTriple:
    """Preconditioner triple of the family with the closed-form ``S^-1 (H + M*)`` action.

    With ``positive_p`` the triple uses ``S = P`` for the semidefinite path.
    """
    L = np.asarray(L.dense() if isinstance(L, LinearMap) else L, dtype=float)
    m, n = L.shape
    mats = pd_matrices(L, params)
    if positive_p:
        return PreconditionerTriple(mats["H"], (n, m), S=None)
    if "S" not in mats:
        raise InvalidParameters("S of the family is singular for these parameters",
                                [strict("S_positive", 0.0, 0.0)])
    return PreconditionerTriple(mats["H"], (n, m), S=mats["S"], direction=_direction(L, params))


def alpha_pd(params: PDParams, xt, yt, L, lam: float = 1.0) -> float:
    """Step size ``lam ||zt||_P^2 / ||zt||_D^2`` in closed form.

    Raises
    ------
    InvariantViolation
        If the denominator is not positive for nonzero ``(xt, yt)``.
    """
    g1, g2, th, mu = params.gamma1, params.gamma2, params.theta, params.mu
    L = np.asarray(L.dense() if isinstance(L, LinearMap) else L, dtype=float)
    xt = np.asarray(xt, dtype=float)
    yt = np.asarray(yt, dtype=float)
    if not (np.any(xt) or np.any(yt)):
        raise ValueError("step size is undefined at zt = 0")
    Lxt = L @ xt
    Ltyt = L.T @ yt
    nx, ny = float(xt @ xt), float(yt @ yt)
    cross = float(xt @ Ltyt)
    base = nx / g1 + ny / g2
    num = base - th * cross
    V = (base + (1 - mu) * g2 * (1 - th) * (2 - th) * float(Lxt @ Lxt)
         + mu * g1 * (2 - th) * float(Ltyt @ Ltyt) + 2 * ((1 - mu) * (1 - th) - mu) * cross)
    if th == 2.0:
        return float(lam)
    if not V > 0:
        raise InvariantViolation(f"||zt||_D^2 = {V} for nonzero zt")
    return float(lam) * num / V


def engine_setup(problem: SaddleProblem, params: PDParams, positive_p: bool = False):
    """Inclusion and preconditioners to run the family through the generic engine."""
    return problem.inclusion(), build_S_family(problem.Ld, params, positive_p=positive_p)


def pd_iterate(problem: SaddleProblem, params: PDParams, x0=None, y0=None, *, lam: float = 1.0,
               fixed_alpha: bool = False, max_iter: int = 10_000, tol_abs: float = 1e-10, tol_rel: float = 0.0,
               z_star=None, record: bool = False, objective: bool = False, certificate: Certificate | None = None,
               validate_params: bool = True, backend: str | None = None) -> SolveReport:
    """Run the primal-dual iteration and return a :class:`SolveReport`.

    Parameters
    ----------
    lam : float
        Constant relaxation, or the step size itself when ``fixed_alpha``.
    fixed_alpha : bool
        Choose ``lam_n = lam ||zt||_D^2/||zt||_P^2`` so every step size is
        ``lam``; the recorded ``lam_n`` is then the implied relaxation.
    z_star : array_like, optional
        Oracle solution ``(x*, y*)``; enables the Fejér series.
    record : bool
        Keep every iterate in the report.
    objective : bool
        Record the primal objective at every iterate.
    certificate : Certificate, optional
        Result of :func:`validate`; computed when missing and
        ``validate_params`` is true.
    """
    n, m = problem.n, problem.m
    x0 = np.zeros(n) if x0 is None else np.asarray(x0, dtype=float)
    y0 = np.zeros(m) if y0 is None else np.asarray(y0, dtype=float)
    if x0.shape != (n,) or y0.shape != (m,):
        raise DimensionMismatch("start point does not match the problem dimensions")
    if certificate is None and validate_params:
        certificate = validate(problem, params, None if fixed_alpha else lam)
    keep = record or z_star is not None or objective
    res = kernels.pd_sweep(problem.Ld, problem.f, problem.g, problem.h, problem.l_mu,
                           params.gamma1, params.gamma2, params.theta, params.mu, x0, y0,
                           lam=lam, fixed_alpha=fixed_alpha, max_iter=max_iter, tol_abs=tol_abs,
                           tol_rel=tol_rel, record=keep, backend=backend)
    return _sweep_report(res, problem, params, z_star, record, objective, certificate)


def _sweep_report(res, problem, params, z_star, record, objective, certificate):
    if res.status == "numeric_failure":
        last = np.concatenate([res.x, res.y])
        if not np.all(np.isfinite(last)):
            last = None if res.X is None or res.X.shape[0] < 2 else np.concatenate([res.X[-2], res.Y[-2]])
        raise NumericalFailure(f"non-finite iterate after {res.iterations} iterations",
                               last_good=last, iteration=res.iterations)
    if res.status == "bad_metric":
        raise InvariantViolation(f"nonpositive ||zt||_D^2 or ||zt||_P^2 at iteration {res.iterations}")
    Z = None
    if res.X is not None:
        Z = np.hstack([res.X, res.Y])
    fej = None
    if z_star is not None:
        mats = pd_matrices(problem.Ld, params)
        positive = certificate.positive_p if certificate is not None else "S" not in mats
        W = mats["P"] if positive else mats["S"]
        d = Z - np.asarray(z_star, dtype=float)
        fej = np.sqrt(np.maximum(np.einsum("ij,jk,ik->i", d, W, d), 0.0))
    obj = None
    if objective:
        obj = np.array([problem.objective(x) for x in res.X])
    diag = {}
    if certificate is not None:
        diag["certificate"] = certificate.to_dict()
    return SolveReport(
        status=res.status,
        z=np.concatenate([res.x, res.y]),
        iterations=res.iterations,
        lam=res.lam,
        alpha=res.alpha,
        res_P=res.res_P,
        res_D=res.res_D,
        fejer=fej,
        objective=obj,
        iterates=Z if record else None,
        split=problem.n,
        diagnostics=diag,
        meta={"engine": "pd_sweep", "backend": res.backend, "gamma1": params.gamma1, "gamma2": params.gamma2,
              "theta": params.theta, "mu": params.mu},
    )
