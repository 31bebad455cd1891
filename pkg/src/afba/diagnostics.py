"""Runtime monitors and post-hoc analyses of solve histories.

Every monitor is a pure function of recorded series and returns a
:class:`Verdict`; re-running it on the same data gives the same answer.
Finite-run checks of asymptotic statements (``little_o_trend``,
``linear_rate_fit``) are empirical proxies and are labeled as such.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np
import scipy.linalg as sla

from .report import SolveReport

__all__ = [
    "Verdict",
    "RateBundle",
    "RanPProjection",
    "sandwich_constants",
    "fejer_distances",
    "monitor_fejer",
    "monitor_dnorm",
    "tau_lower",
    "rate_bound_check",
    "little_o_trend",
    "linear_rate_fit",
    "ran_p_tau",
    "ran_p_rate",
    "report_verdicts",
]

#: relative eigenvalue cutoff separating ran(P) from its null space
RANGE_CUTOFF = 1e-10


@dataclass
class Verdict:
    """Outcome of one monitor.

    Attributes
    ----------
    name : str
    holds : bool or None
        ``None`` when the monitor does not apply to the data.
    label : str
        ``"check"`` for direct checks, ``"empirical"`` for proxies of
        asymptotic statements.
    worst_index : int or None
        Index with the smallest margin.
    worst_margin : float or None
        ``bound - value`` at ``worst_index`` (negative when violated).
    details : dict
    """

    name: str
    holds: bool | None
    label: str = "check"
    worst_index: int | None = None
    worst_margin: float | None = None
    details: dict[str, Any] = field(default_factory=dict)

    @property
    def applicable(self) -> bool:
        return self.holds is not None

    def __bool__(self):
        return bool(self.holds)

    def to_dict(self) -> dict:
        return {"name": self.name, "holds": self.holds, "label": self.label, "worst_index": self.worst_index,
                "worst_margin": _num(self.worst_margin), "details": {k: _num(v) for k, v in self.details.items()}}


def _num(x):
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
    if isinstance(x, np.integer):
        return int(x)
    return x


def _sequence_check(name, values, bounds, label="check", **details) -> Verdict:
    values = np.asarray(values, dtype=float)
    bounds = np.asarray(bounds, dtype=float)
    if values.size == 0:
        return Verdict(name, True, label, details=details)
    margins = bounds - values
    i = int(np.argmin(margins))
    return Verdict(name, bool(np.all(values <= bounds)), label, i, float(margins[i]), details)


@dataclass
class RateBundle:
    """Sandwich constants, relaxation floor and a ``||zt_n||_D^2`` series."""

    c1: float
    c2: float
    tau_lower: float
    series: np.ndarray

    def __post_init__(self):
        if self.c1 > self.c2:
            raise ValueError("c1 must not exceed c2")


def sandwich_constants(P, D) -> tuple[float, float]:
    """Extreme eigenvalues of the pencil ``P^-1/2 D P^-1/2``.

    These are the best constants with ``c1 P <= D <= c2 P``.

    Raises
    ------
    ValueError
        If ``P`` is not positive definite; use :class:`RanPProjection`
        for the semidefinite case.

    Examples
    --------
    >>> import numpy as np
    >>> sandwich_constants(np.eye(2) / 4.0, np.eye(2) / 16.0)
    (0.25, 0.25)
    """
    P = np.asarray(P, dtype=float)
    D = np.asarray(D, dtype=float)
    P = 0.5 * (P + P.T)
    D = 0.5 * (D + D.T)
    lo = float(sla.eigvalsh(P)[0])
    if not lo > 0:
        raise ValueError(f"P is singular (min eigenvalue {lo:.3g}); use the ran(P) analysis")
    w = sla.eigh(D, P, eigvals_only=True)
    return float(w[0]), float(w[-1])


def fejer_distances(iterates, z_star, S) -> np.ndarray:
    """``||z_n - z*||_S`` for every row of ``iterates``."""
    Z = np.atleast_2d(np.asarray(iterates, dtype=float))
    d = Z - np.asarray(z_star, dtype=float)
    S = np.asarray(S, dtype=float)
    return np.sqrt(np.maximum(np.einsum("ij,jk,ik->i", d, S, d), 0.0))


def monitor_fejer(dist, rel: float = 1e-12, abs_tol: float = 1e-14) -> Verdict:
    """``d_{n+1} <= d_n (1 + rel) + abs_tol`` for all ``n``.

    Parameters
    ----------
    dist : array_like
        Distances ``||z_n - z*||_S``, one per iterate.
    """
    d = np.asarray(dist, dtype=float)
    return _sequence_check("fejer", d[1:], d[:-1] * (1.0 + rel) + abs_tol, rel=rel, abs=abs_tol)


def monitor_dnorm(res_D, lam=None, c1: float | None = None, c2: float | None = None, delta: float | None = None,
                  rel: float = 1e-12) -> Verdict:
    """``||zt_{n+1}||_D^2 <= ||zt_n||_D^2 (1 + rel)`` for all ``n``.

    The statement is only claimed for relaxations up to ``c1 delta / c2``;
    when ``lam`` exceeds that cap the verdict is ``None`` (not applicable).
    """
    s = np.asarray(res_D, dtype=float) ** 2
    cap = None
    if lam is not None and None not in (c1, c2, delta):
        cap = c1 * delta / c2
        if np.max(np.asarray(lam, dtype=float), initial=0.0) > cap * (1.0 + 1e-12):
            return Verdict("dnorm_monotone", None, details={"lambda_cap": cap,
                                                            "lambda_max": float(np.max(lam))})
    v = _sequence_check("dnorm_monotone", s[1:], s[:-1] * (1.0 + rel), rel=rel)
    if cap is not None:
        v.details["lambda_cap"] = cap
    return v


def tau_lower(lam, delta: float) -> float:
    """``min_n lam_n (delta - lam_n)``."""
    lam = np.asarray(lam, dtype=float)
    if lam.size == 0:
        return math.inf
    return float(np.min(lam * (delta - lam)))


def rate_bound_check(res_D, c2: float, tau: float, dist0_S: float, slack: float = 1e-9) -> Verdict:
    """``||zt_n||_D^2 <= c2^2 / (tau (n+1)) ||z_0 - z*||_S^2`` for all ``n``.

    Parameters
    ----------
    res_D : array_like
        ``||zt_n||_D``.
    tau : float
        Lower bound on ``lam_n (delta - lam_n)``; must be positive.
    dist0_S : float
        ``||z_0 - z*||_S``.
    """
    if not tau > 0:
        return Verdict("rate_bound", None, details={"tau": tau})
    s = np.asarray(res_D, dtype=float) ** 2
    n = np.arange(s.size)
    bound = c2 ** 2 / (tau * (n + 1.0)) * dist0_S ** 2
    return _sequence_check("rate_bound", s, bound * (1.0 + slack), c2=c2, tau=tau, slack=slack)


def little_o_trend(series, factor: float = 10.0) -> Verdict:
    """Empirical proxy for ``series_n = o(1/(n+1))``.

    Over the second half of the run, ``(n+1) series_n`` must fall by at
    least ``factor`` from its maximum to its final value.  Short runs give
    false negatives; fewer than 100 points give ``None``.

    Examples
    --------
    >>> import numpy as np
    >>> little_o_trend(0.9 ** np.arange(200)).holds
    True
    >>> little_o_trend(1.0 / np.arange(1, 201)).holds
    False
    """
    s = np.asarray(series, dtype=float)
    if s.size < 100:
        return Verdict("little_o", None, "empirical", details={"length": int(s.size)})
    w = (np.arange(s.size) + 1.0) * s
    half = w[s.size // 2:]
    peak = float(np.max(half))
    last = float(half[-1])
    ratio = 0.0 if peak == 0.0 else last / peak
    return Verdict("little_o", bool(ratio <= 1.0 / factor), "empirical",
                   details={"ratio": ratio, "factor": factor})


def _rms_residual(t, v):
    A = np.column_stack([t, np.ones_like(t)])
    coef, *_ = np.linalg.lstsq(A, v, rcond=None)
    r = v - A @ coef
    return float(np.sqrt(np.mean(r ** 2))), coef


def linear_rate_fit(dist, burn_in: float = 0.2, floor_rel: float = 1e-10, floor_abs: float = 1e-13) -> Verdict:
    """Estimate a Q-linear rate from distances ``d_n``.

    Fits ``log d_n`` linearly in ``n`` over the window after ``burn_in``
    (a fraction of the pre-floor length).  The window ends where ``d_n``
    first drops to ``floor_rel d_0 + floor_abs``, since beyond that point
    the oracle accuracy dominates.  The verdict is ``"linear"`` when the
    largest per-step ratio ``kappa`` over the window is below one and the
    semilog fit explains the data at least as well as a power law in
    ``n + 1``.

    Returns
    -------
    Verdict
        ``holds`` is the boolean verdict; ``details`` carries
        ``q_factor`` (``exp`` of the fitted slope), ``kappa`` and
        ``verdict`` (``"linear"``, ``"not linear"`` or ``"insufficient"``).

    Examples
    --------
    >>> import numpy as np
    >>> v = linear_rate_fit(0.5 ** np.arange(40))
    >>> round(v.details["q_factor"], 6), v.details["verdict"]
    (0.5, 'linear')
    >>> linear_rate_fit(1.0 / np.arange(1, 400)).details["verdict"]
    'not linear'
    """
    d = np.asarray(dist, dtype=float)
    floor = floor_rel * (d[0] if d.size else 0.0) + floor_abs
    hit = np.nonzero(d <= floor)[0]
    end = int(hit[0]) if hit.size else d.size
    start = int(burn_in * end)
    w = d[start:end]
    if w.size < 3:
        return Verdict("linear_rate", None, "empirical",
                       details={"verdict": "insufficient", "window": int(w.size)})
    t = np.arange(start, end, dtype=float)
    lw = np.log(w)
    res_semi, coef = _rms_residual(t, lw)
    res_pow, _ = _rms_residual(np.log(t + 1.0), lw)
    q = float(math.exp(coef[0]))
    kappa = float(np.max(w[1:] / w[:-1]))
    linear = kappa < 1.0 and res_semi <= res_pow
    return Verdict("linear_rate", bool(linear), "empirical",
                   details={"q_factor": q, "kappa": kappa, "verdict": "linear" if linear else "not linear",
                            "window_start": start, "window_end": end, "semilog_residual": res_semi,
                            "power_residual": res_pow})


class RanPProjection:
    """Orthogonal projector ``Q`` onto ``ran(P)`` and the metric ``R = P + Id - Q``.

    Eigenvalues below ``1e-10 ||P||`` are treated as zero.  ``R`` is
    strongly positive and satisfies ``<Qv, R Qv> = <v, P v>``.
    """

    def __init__(self, P):
        P = np.asarray(P, dtype=float)
        P = 0.5 * (P + P.T)
        w, V = sla.eigh(P)
        scale = float(np.max(np.abs(w), initial=0.0))
        keep = w > RANGE_CUTOFF * scale
        Vr = V[:, keep]
        self.P = P
        self.norm_P = scale
        self.rank = int(keep.sum())
        self.lambda_min_plus = float(w[keep].min()) if self.rank else 0.0
        self.Q = Vr @ Vr.T
        self.R = P + np.eye(P.shape[0]) - self.Q

    def norm_R_sq(self, v) -> float:
        v = np.asarray(v, dtype=float)
        return float(v @ self.R @ v)

    def project(self, v) -> np.ndarray:
        return self.Q @ np.asarray(v, dtype=float)


def ran_p_tau(lam) -> float:
    """``eps^2 / (2 - eps)^2`` for relaxations in ``[eps, 2 - eps]``.

    >>> ran_p_tau([1.0, 1.0])
    1.0
    """
    lam = np.asarray(lam, dtype=float)
    eps = float(min(lam.min(), 2.0 - lam.max()))
    if not eps > 0:
        return 0.0
    return eps ** 2 / (2.0 - eps) ** 2


def ran_p_rate(series, proj: RanPProjection, tau: float, z0, z_star=None, scale: float | None = None,
               slack: float = 1e-9, z_best=None) -> Verdict:
    """``||u_{n+1} - u_n||^2 <= scale / (tau (n+1)) ||Q z_0 - Q z*||_R^2`` for all ``n``.

    Parameters
    ----------
    series : array_like, shape (N + 1, k)
        ``u_n = P z_n`` (with ``scale = ||P||``) or the shadow sequence
        ``s_n`` of the Douglas-Rachford iteration (with ``scale = gamma``).
    proj : RanPProjection
    tau : float
        See :func:`ran_p_tau`.
    z0 : array_like
        Starting point.
    z_star : array_like, optional
        Solution.  When missing, ``z_best`` (typically the final iterate)
        stands in and the verdict is flagged ``approximate``.
    """
    U = np.atleast_2d(np.asarray(series, dtype=float))
    z0 = np.asarray(z0, dtype=float)
    approximate = z_star is None
    if approximate:
        if z_best is None:
            raise ValueError("either z_star or z_best is required")
        z_star = z_best
    scale = proj.norm_P if scale is None else float(scale)
    if not tau > 0:
        return Verdict("ran_p_rate", None, details={"tau": tau, "approximate": approximate})
    q = proj.project(z0 - np.asarray(z_star, dtype=float))
    r0 = proj.norm_R_sq(q)
    inc = np.sum(np.diff(U, axis=0) ** 2, axis=1)
    n = np.arange(inc.size)
    bound = scale / (tau * (n + 1.0)) * r0
    v = _sequence_check("ran_p_rate", inc, bound * (1.0 + slack), tau=tau, scale=scale)
    v.details["approximate"] = approximate
    return v


def report_verdicts(report: SolveReport, certificate=None, z0=None, z_star=None, S=None) -> dict:
    """Run every applicable monitor on a report and return serializable verdicts."""
    out = {}
    if report.fejer is not None:
        out["fejer"] = monitor_fejer(report.fejer, rel=1e-10).to_dict()
        out["linear_rate"] = linear_rate_fit(report.fejer).to_dict()
    c = certificate
    if c is not None and c.c1 is not None and c.c2 is not None and not c.positive_p:
        out["dnorm_monotone"] = monitor_dnorm(report.res_D, report.lam, c.c1, c.c2, c.delta).to_dict()
        if report.fejer is not None:
            tau = tau_lower(report.lam, c.delta)
            out["rate_bound"] = rate_bound_check(report.res_D, c.c2, tau, float(report.fejer[0])).to_dict()
    if report.iterations >= 100:
        out["little_o"] = little_o_trend(report.res_D ** 2).to_dict()
    return out
