"""Independent textbook codings used as oracles in the equivalence tests.

Nothing here imports the package: prox maps are written from their closed
forms and every loop follows the usual textbook listing.
"""
import numpy as np


def prox_quad(Q, q, gamma, v):
    """argmin_x x'Qx/2 + q'x + ||x - v||^2 / (2 gamma)."""
    n = len(v)
    return np.linalg.solve(np.eye(n) + gamma * Q, v - gamma * q)


def proj_box(lo, hi, v):
    return np.minimum(np.maximum(v, lo), hi)


def soft(v, t):
    return np.sign(v) * np.maximum(np.abs(v) - t, 0.0)


def douglas_rachford(prox_f, prox_g, s0, rho, iters):
    """x = prox_f(s); z = prox_g(2x - s); s += rho (z - x).  Returns the s and x sequences."""
    s = np.array(s0, dtype=float)
    S, X = [s.copy()], []
    for _ in range(iters):
        x = prox_f(s)
        z = prox_g(2.0 * x - s)
        s = s + rho * (z - x)
        S.append(s.copy())
        X.append(x)
    return np.array(S), np.array(X)


def proximal_gradient(prox, grad, z0, gamma, lam, iters):
    """z += lam (prox(z - gamma grad z) - z)."""
    z = np.array(z0, dtype=float)
    out = [z.copy()]
    for _ in range(iters):
        z = z + lam * (prox(z - gamma * grad(z)) - z)
        out.append(z.copy())
    return np.array(out)


def condat_vu(prox_tf, prox_sgc, grad_h, L, x0, y0, tau, sigma, lam, iters, grad_lc=None):
    """Relaxed Condat-Vu iteration.

    xt = prox_{tau f}(x - tau (grad h(x) + L'y))
    yt = prox_{sigma g*}(y + sigma L(2 xt - x) - sigma grad l*(y))
    (x, y) += lam ((xt, yt) - (x, y))
    """
    x, y = np.array(x0, dtype=float), np.array(y0, dtype=float)
    Z = [np.concatenate([x, y])]
    for _ in range(iters):
        xt = prox_tf(x - tau * (grad_h(x) + L.T @ y))
        w = y + sigma * (L @ (2.0 * xt - x))
        if grad_lc is not None:
            w = w - sigma * grad_lc(y)
        yt = prox_sgc(w)
        x = x + lam * (xt - x)
        y = y + lam * (yt - y)
        Z.append(np.concatenate([x, y]))
    return np.array(Z)


def dst(prox_f, prox_gc, grad_h, L, x0, y0, g1, g2, iters):
    """xbar = prox(x - g1 L'y - g1 grad h(x)); y+ = prox_{g2 g*}(y + g2 L xbar);
    x+ = xbar - g1 L'(y+ - y)."""
    x, y = np.array(x0, dtype=float), np.array(y0, dtype=float)
    Z = [np.concatenate([x, y])]
    for _ in range(iters):
        xbar = prox_f(x - g1 * (L.T @ y) - g1 * grad_h(x))
        yn = prox_gc(y + g2 * (L @ xbar))
        x = xbar - g1 * (L.T @ (yn - y))
        y = yn
        Z.append(np.concatenate([x, y]))
    return np.array(Z)


def bac(prox_f, prox_gc, grad_h, L, x0, y0, g1, g2, iters):
    """Both proxes at (x, y); x+ = xbar - g1 L'(ybar - y); y+ = ybar + g2 L(xbar - x)."""
    x, y = np.array(x0, dtype=float), np.array(y0, dtype=float)
    Z = [np.concatenate([x, y])]
    for _ in range(iters):
        xbar = prox_f(x - g1 * (L.T @ y) - g1 * grad_h(x))
        ybar = prox_gc(y + g2 * (L @ x))
        xn = xbar - g1 * (L.T @ (ybar - y))
        yn = ybar + g2 * (L @ (xbar - x))
        x, y = xn, yn
        Z.append(np.concatenate([x, y]))
    return np.array(Z)


def mu0(prox_f, prox_gc, L, x0, y0, g1, g2, theta, iters):
    """x+ = prox(x - g1 L'y); ybar = prox_{g2 g*}(y + g2 L((1-theta) x + theta x+));
    y+ = ybar + g2 (2 - theta) L(x+ - x)."""
    x, y = np.array(x0, dtype=float), np.array(y0, dtype=float)
    Z = [np.concatenate([x, y])]
    for _ in range(iters):
        xn = prox_f(x - g1 * (L.T @ y))
        ybar = prox_gc(y + g2 * (L @ ((1.0 - theta) * x + theta * xn)))
        y = ybar + g2 * (2.0 - theta) * (L @ (xn - x))
        x = xn
        Z.append(np.concatenate([x, y]))
    return np.array(Z)


def tseng_fbf(resolvent, B, C, z0, gamma, iters):
    """zbar = J(z - gamma (B z + C z)); z+ = zbar - gamma (B zbar - B z)."""
    z = np.array(z0, dtype=float)
    out = [z.copy()]
    for _ in range(iters):
        Bz = B @ z
        zbar = resolvent(z - gamma * (Bz + C(z)))
        z = zbar - gamma * (B @ zbar - Bz)
        out.append(z.copy())
    return np.array(out)


def conj_prox_point(b, sigma):
    """prox_{sigma g*} for g the indicator of {b}: v -> v - sigma b."""
    return lambda v: v - sigma * b
