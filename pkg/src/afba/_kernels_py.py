"""NumPy implementation of the primal-dual sweep.

Mirrors ``_kernels.pyx`` statement by statement; used when the compiled
module is unavailable or when ``AFBA_KERNELS=python`` is set.
"""
import math

import numpy as np

ZERO, L1, SQL2, BOX, POINT, NONNEG, L2, QUAD = range(8)

# status codes shared with the compiled kernel
MAX_ITER, CONVERGED, STATIONARY, NONFINITE, BAD_METRIC = range(5)


def prox(code, s, a, b, M, v):
    if code == ZERO:
        return v.copy()
    if code == L1:
        return np.sign(v) * np.maximum(np.abs(v) - s, 0.0)
    if code == SQL2:
        return v / s
    if code == BOX:
        return np.minimum(np.maximum(v, a), b)
    if code == POINT:
        return a.copy()
    if code == NONNEG:
        return np.maximum(v, 0.0)
    if code == L2:
        nv = math.sqrt(float(np.dot(v, v)))
        if nv <= s:
            return np.zeros_like(v)
        return (1.0 - s / nv) * v
    if code == QUAD:
        return M @ (v - a)
    raise ValueError(f"unknown prox code {code}")


def pd_sweep(L, f, g, hG, hc, l_inv, g1, g2, th, mu, mode, lam_value,
             x0, y0, max_iter, tol_abs, tol_rel, record):
    """Run the primal-dual iteration; see :func:`afba.kernels.pd_sweep`."""
    m, n = L.shape
    x = np.array(x0, dtype=float)
    y = np.array(y0, dtype=float)
    lam_hist = np.empty(max_iter)
    alpha_hist = np.empty(max_iter)
    resP = np.empty(max_iter)
    resD = np.empty(max_iter)
    X = np.empty((max_iter + 1, n)) if record else None
    Y = np.empty((max_iter + 1, m)) if record else None
    if record:
        X[0] = x
        Y[0] = y

    c2t = 2.0 - th
    is_pos = th == 2.0
    use_Lxt = mu != 1.0 or is_pos
    use_Ltyt = mu != 0.0 or is_pos
    need_Lx = use_Lxt or th != 1.0
    track_Lx = need_Lx and (mu == 0.0 or is_pos)
    track_Lty = use_Ltyt and (mu == 1.0 or is_pos)
    dx_coef = mu * g1 * c2t
    dy_coef = g2 * (1.0 - mu) * c2t
    vx_coef = (1.0 - mu) * g2 * (1.0 - th) * c2t
    vy_coef = mu * g1 * c2t
    vc_coef = 2.0 * ((1.0 - mu) * (1.0 - th) - mu)
    fcode, fs, fa, fb, fM = f
    gcode, gs, ga, gb, gM = g
    ig2 = 1.0 / g2
    gl = g2 * l_inv

    Lx = L @ x if need_Lx else None
    Lty = L.T @ y
    status = MAX_ITER
    k = 0
    while k < max_iter:
        if not track_Lty:
            Lty = L.T @ y
        if need_Lx and not track_Lx:
            Lx = L @ x
        vx = Lty
        if hG is not None:
            vx = vx + (hG @ x + hc)
        xbar = prox(fcode, fs, fa, fb, fM, x - g1 * vx)
        Lxbar = L @ xbar
        if th == 1.0:
            Lu = Lxbar
        else:
            Lu = (1.0 - th) * Lx + th * Lxbar
        vy = y + g2 * Lu
        if l_inv != 0.0:
            vy = vy - gl * y
        ybar = vy - g2 * prox(gcode, gs, ga, gb, gM, vy * ig2)
        xt = xbar - x
        yt = ybar - y
        nx = float(np.dot(xt, xt))
        ny = float(np.dot(yt, yt))
        if use_Lxt:
            Lxt = Lxbar - Lx
            cross = float(np.dot(Lxt, yt))
            lx = float(np.dot(Lxt, Lxt))
        else:
            lx = 0.0
        if use_Ltyt:
            Ltyt = L.T @ ybar - Lty
            ly = float(np.dot(Ltyt, Ltyt))
            if not use_Lxt:
                cross = float(np.dot(xt, Ltyt))
        else:
            ly = 0.0
        base = nx / g1 + ny / g2
        num = base - th * cross
        V = base + vx_coef * lx + vy_coef * ly + vc_coef * cross
        if not (math.isfinite(nx) and math.isfinite(ny) and math.isfinite(V) and math.isfinite(num)):
            status = NONFINITE
            break
        if nx == 0.0 and ny == 0.0:
            status = STATIONARY if k == 0 else CONVERGED
            break
        if is_pos:
            lam = lam_value
            alpha = lam
        else:
            if not (V > 0.0 and num > 0.0):
                status = BAD_METRIC
                break
            lam = lam_value * V / num if mode == 1 else lam_value
            alpha = lam * num / V
        if is_pos or mu == 0.0:
            x = x + alpha * xt
        else:
            x = x + alpha * (xt - dx_coef * Ltyt)
        if is_pos or mu == 1.0:
            y = y + alpha * yt
        else:
            y = y + alpha * (dy_coef * Lxt + yt)
        if track_Lx:
            Lx = Lx + alpha * Lxt
        if track_Lty:
            Lty = Lty + alpha * Ltyt
        lam_hist[k] = lam
        alpha_hist[k] = alpha
        rp = math.sqrt(num) if num > 0.0 else 0.0
        resP[k] = rp
        resD[k] = math.sqrt(V) if V > 0.0 else 0.0
        k += 1
        if record:
            X[k] = x
            Y[k] = y
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
            status = NONFINITE
            break
        tol = tol_abs
        if tol_rel != 0.0:
            Lxn = L @ x
            zP = float(np.dot(x, x)) / g1 + float(np.dot(y, y)) / g2 - th * float(np.dot(Lxn, y))
            tol = tol + tol_rel * math.sqrt(max(zP, 0.0))
        if rp <= tol:
            status = CONVERGED
            break
    return (x, y, k, status, lam_hist[:k].copy(), alpha_hist[:k].copy(), resP[:k].copy(), resD[:k].copy(),
            None if X is None else X[: k + 1].copy(), None if Y is None else Y[: k + 1].copy())
