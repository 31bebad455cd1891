"""Shared fixture builders for the test modules."""
import numpy as np

from afba.atoms import L1, Box, L2Norm, NonNeg, Quadratic, SqL2

import reference as ref


def _spd(rng, n, lo, hi):
    U, _ = np.linalg.qr(rng.standard_normal((n, n)))
    M = (U * rng.uniform(lo, hi, n)) @ U.T
    return 0.5 * (M + M.T)


def random_prox_pair(seed, n=8):
    """A random ``(D, E)`` atom pair with a strongly convex ``E``.

    Returns the package atoms, the dimension and textbook prox maps
    ``prox_D(gamma, v)``, ``prox_E(gamma, v)`` coded independently.
    """
    rng = np.random.default_rng(seed)
    kind = ["box", "l1", "nonneg", "quad", "l2"][seed % 5]
    if kind == "box":
        lo = -rng.uniform(0.1, 1.0, n)
        hi = rng.uniform(0.1, 1.0, n)
        D = Box(lo, hi)
        pD = lambda g, v: ref.proj_box(lo, hi, v)
    elif kind == "l1":
        w = rng.uniform(0.2, 1.5)
        D = L1(w)
        pD = lambda g, v: ref.soft(v, g * w)
    elif kind == "nonneg":
        D = NonNeg(n)
        pD = lambda g, v: np.maximum(v, 0.0)
    elif kind == "quad":
        Q0 = _spd(rng, n, 0.0, 2.0)
        q0 = rng.standard_normal(n)
        D = Quadratic(Q0, q0)
        pD = lambda g, v: ref.prox_quad(Q0, q0, g, v)
    else:
        w = rng.uniform(0.2, 1.5)
        D = L2Norm(w)

        def pD(g, v):
            r = np.linalg.norm(v)
            return np.zeros_like(v) if r <= g * w else (1.0 - g * w / r) * v

    if seed % 2:
        Q = _spd(rng, n, 0.5, 4.0)
        q = 2.0 * rng.standard_normal(n)
        E = Quadratic(Q, q)
        pE = lambda g, v: ref.prox_quad(Q, q, g, v)
    else:
        mu = rng.uniform(0.5, 3.0)
        E = SqL2(mu)
        pE = lambda g, v: v / (1.0 + g * mu)
    return D, E, n, pD, pE


def reference_drs_limit(pD, pE, gamma, n, iters=200_000):
    """High-accuracy solution ``(x*, s*)`` by running the textbook loop to stagnation."""
    s = np.zeros(n)
    for _ in range(iters):
        x = pD(gamma, s)
        s_new = s + pE(gamma, 2.0 * x - s) - x
        if np.linalg.norm(s_new - s) <= 1e-15 * max(1.0, np.linalg.norm(s)):
            s = s_new
            break
        s = s_new
    return pD(gamma, s), s


def max_rel_diff(A, B):
    A, B = np.asarray(A), np.asarray(B)
    return float(np.max(np.abs(A - B)) / max(1.0, np.max(np.abs(B))))


def fejer_holds(dist, rel=1e-10):
    """``d_{n+1} <= d_n + rel * d_0`` at every step; returns (ok, worst excess)."""
    d = np.asarray(dist, dtype=float)
    excess = d[1:] - d[:-1] - rel * d[0]
    worst = float(excess.max(initial=-np.inf))
    return worst <= 0.0, worst
