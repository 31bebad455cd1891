"""Backend selection for the hot primal-dual loop.

The compiled module ``afba._kernels`` is used when it imports; otherwise,
or when the environment variable ``AFBA_KERNELS=python`` is set, the NumPy
implementation in ``afba._kernels_py`` is used.  Both expose the same
``pd_sweep`` function and agree to rounding.

Attributes
----------
BACKEND : str
    ``"compiled"`` or ``"python"``.
"""
from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

from . import _kernels_py
from .atoms import Box, CocoMap, L1, L2Norm, NonNeg, Point, ProxAtom, Quadratic, SqL2, Zero

__all__ = ["BACKEND", "available_backends", "code_atom", "pd_sweep", "SweepResult", "STATUS_NAMES"]

_compiled = None
if os.environ.get("AFBA_KERNELS", "").lower() != "python":
    try:
        from . import _kernels as _compiled
    except ImportError:  # pragma: no cover - depends on the build
        _compiled = None

BACKEND = "compiled" if _compiled is not None else "python"

STATUS_NAMES = {
    _kernels_py.MAX_ITER: "max_iter",
    _kernels_py.CONVERGED: "converged",
    _kernels_py.STATIONARY: "stationary",
    _kernels_py.NONFINITE: "numeric_failure",
    _kernels_py.BAD_METRIC: "bad_metric",
}


def available_backends() -> list[str]:
    return ["compiled", "python"] if _compiled is not None else ["python"]


_EMPTY = np.zeros(0)
_EMPTY2 = np.zeros((1, 1))


def code_atom(atom: ProxAtom, gamma: float, dim: int) -> tuple:
    """Encode ``prox_{gamma atom}`` on vectors of length ``dim`` for the kernels.

    Returns ``(code, s, a, b, M)``; the meaning of the fields depends on
    the code (threshold, divisor, bounds, point, factor inverse).
    """
    k = _kernels_py
    z = np.zeros(dim)
    if isinstance(atom, Zero):
        return (k.ZERO, 0.0, z, z, _EMPTY2)
    if isinstance(atom, L1):
        return (k.L1, gamma * atom.weight, z, z, _EMPTY2)
    if isinstance(atom, SqL2):
        return (k.SQL2, 1.0 + gamma * atom.mu, z, z, _EMPTY2)
    if isinstance(atom, Box):
        lo = np.ascontiguousarray(np.broadcast_to(atom.lo, (dim,)), dtype=float)
        hi = np.ascontiguousarray(np.broadcast_to(atom.hi, (dim,)), dtype=float)
        return (k.BOX, 0.0, lo, hi, _EMPTY2)
    if isinstance(atom, Point):
        return (k.POINT, 0.0, np.ascontiguousarray(atom.b, dtype=float), z, _EMPTY2)
    if isinstance(atom, NonNeg):
        return (k.NONNEG, 0.0, z, z, _EMPTY2)
    if isinstance(atom, L2Norm):
        return (k.L2, gamma * atom.weight, z, z, _EMPTY2)
    if isinstance(atom, Quadratic):
        M = np.linalg.inv(np.eye(atom.dim) + gamma * atom.Q)
        return (k.QUAD, 0.0, np.ascontiguousarray(gamma * atom.q), z, np.ascontiguousarray(M))
    raise TypeError(f"no kernel encoding for {type(atom).__name__}")


@dataclass
class SweepResult:
    x: np.ndarray
    y: np.ndarray
    iterations: int
    status: str
    lam: np.ndarray
    alpha: np.ndarray
    res_P: np.ndarray
    res_D: np.ndarray
    X: np.ndarray | None
    Y: np.ndarray | None
    backend: str


def pd_sweep(L, f: ProxAtom, g: ProxAtom, h: CocoMap | None, l_mu: float | None,
             gamma1: float, gamma2: float, theta: float, mu: float, x0, y0, *,
             lam: float = 1.0, fixed_alpha: bool = False, max_iter: int = 10_000,
             tol_abs: float = 1e-10, tol_rel: float = 0.0, record: bool = False,
             backend: str | None = None) -> SweepResult:
    """Run the primal-dual iteration for ``min f + h + (g box l)(L .)``.

    Parameters
    ----------
    L : ndarray, shape (m, n)
    f, g : ProxAtom
        ``g`` enters through its conjugate via the Moreau identity.
    h : CocoMap or None
        Gradient of the smooth primal term.
    l_mu : float or None
        Strong convexity of ``l``; ``None`` means ``l`` is the indicator
        of ``{0}``.
    gamma1, gamma2, theta, mu : float
        Step sizes, coupling and metric blend.
    lam : float
        Constant relaxation, or the fixed step size when ``fixed_alpha``.
    fixed_alpha : bool
        Choose ``lam_n`` so that every step size equals ``lam``.
    backend : {"compiled", "python"}, optional
        Defaults to :data:`BACKEND`.

    Returns
    -------
    SweepResult
    """
    backend = backend or BACKEND
    if backend == "compiled":
        if _compiled is None:
            raise RuntimeError("compiled kernels are not available")
        impl = _compiled.pd_sweep
    elif backend == "python":
        impl = _kernels_py.pd_sweep
    else:
        raise ValueError(f"unknown backend {backend!r}")
    L = np.ascontiguousarray(L, dtype=float)
    m, n = L.shape
    fc = code_atom(f, gamma1, n)
    gc = code_atom(g, 1.0 / gamma2, m)
    if h is not None and not h.is_zero:
        hG, hc = np.ascontiguousarray(h.G), np.ascontiguousarray(h.c)
    else:
        hG = hc = None
    l_inv = 0.0 if l_mu is None else 1.0 / float(l_mu)
    out = impl(L, fc, gc, hG, hc, l_inv, float(gamma1), float(gamma2), float(theta), float(mu),
               1 if fixed_alpha else 0, float(lam), np.asarray(x0, dtype=float), np.asarray(y0, dtype=float),
               int(max_iter), float(tol_abs), float(tol_rel), bool(record))
    x, y, k, status, lam_h, alpha_h, rp, rd, X, Y = out
    return SweepResult(x, y, int(k), STATUS_NAMES[int(status)], lam_h, alpha_h, rp, rd, X, Y, backend)
