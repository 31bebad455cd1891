# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled primal-dual sweep.

Same arithmetic as ``_kernels_py.pd_sweep`` with the proximal maps
written as plain C loops and the matrix-vector products done by BLAS
(or plain loops on small operators), which removes the
per-iteration interpreter overhead that dominates at desk scale.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, fabs, isfinite
from scipy.linalg.cython_blas cimport dgemv

cnp.import_array()

cdef enum:
    ZERO = 0
    L1 = 1
    SQL2 = 2
    BOX = 3
    POINT = 4
    NONNEG = 5
    L2 = 6
    QUAD = 7

cdef enum:
    MAX_ITER = 0
    CONVERGED = 1
    STATIONARY = 2
    NONFINITE = 3
    BAD_METRIC = 4


# below this many entries plain loops beat the BLAS call overhead
DEF BLAS_MIN = 4096


cdef inline void matvec(const double[:, ::1] A, const double[::1] v, double[::1] out) noexcept nogil:
    cdef Py_ssize_t i, j
    cdef Py_ssize_t m = A.shape[0], n = A.shape[1]
    cdef double s
    cdef int fm = <int>m, fn = <int>n, one = 1
    cdef double alpha = 1.0, beta = 0.0
    cdef char trans = b'T'
    if m * n >= BLAS_MIN:
        # row-major A is column-major A^T
        dgemv(&trans, &fn, &fm, &alpha, <double*>&A[0, 0], &fn, <double*>&v[0], &one, &beta, &out[0], &one)
        return
    for i in range(m):
        s = 0.0
        for j in range(n):
            s += A[i, j] * v[j]
        out[i] = s


cdef inline void rmatvec(const double[:, ::1] A, const double[::1] w, double[::1] out) noexcept nogil:
    cdef Py_ssize_t i, j
    cdef Py_ssize_t m = A.shape[0], n = A.shape[1]
    cdef double wi
    cdef int fm = <int>m, fn = <int>n, one = 1
    cdef double alpha = 1.0, beta = 0.0
    cdef char trans = b'N'
    if m * n >= BLAS_MIN:
        dgemv(&trans, &fn, &fm, &alpha, <double*>&A[0, 0], &fn, <double*>&w[0], &one, &beta, &out[0], &one)
        return
    for j in range(n):
        out[j] = 0.0
    for i in range(m):
        wi = w[i]
        for j in range(n):
            out[j] += A[i, j] * wi


cdef inline double dot(const double[::1] u, const double[::1] v) noexcept nogil:
    cdef Py_ssize_t i
    cdef double s = 0.0
    for i in range(u.shape[0]):
        s += u[i] * v[i]
    return s


cdef void prox(int code, double s, const double[::1] a, const double[::1] b, const double[:, ::1] M,
               const double[::1] v, double[::1] out, double[::1] tmp) noexcept nogil:
    cdef Py_ssize_t i, n = v.shape[0]
    cdef double t, nv
    if code == ZERO:
        for i in range(n):
            out[i] = v[i]
    elif code == L1:
        for i in range(n):
            t = fabs(v[i]) - s
            if t <= 0.0:
                out[i] = 0.0
            elif v[i] > 0.0:
                out[i] = t
            else:
                out[i] = -t
    elif code == SQL2:
        for i in range(n):
            out[i] = v[i] / s
    elif code == BOX:
        for i in range(n):
            t = v[i]
            if t < a[i]:
                t = a[i]
            if t > b[i]:
                t = b[i]
            out[i] = t
    elif code == POINT:
        for i in range(n):
            out[i] = a[i]
    elif code == NONNEG:
        for i in range(n):
            out[i] = v[i] if v[i] > 0.0 else 0.0
    elif code == L2:
        nv = sqrt(dot(v, v))
        if nv <= s:
            for i in range(n):
                out[i] = 0.0
        else:
            t = 1.0 - s / nv
            for i in range(n):
                out[i] = t * v[i]
    elif code == QUAD:
        for i in range(n):
            tmp[i] = v[i] - a[i]
        matvec(M, tmp, out)


def pd_sweep(const double[:, ::1] L, tuple f, tuple g, hG, hc, double l_inv,
             double g1, double g2, double th, double mu, int mode, double lam_value,
             x0, y0, Py_ssize_t max_iter, double tol_abs, double tol_rel, bint record):
    """Compiled twin of ``_kernels_py.pd_sweep``."""
    cdef Py_ssize_t m = L.shape[0], n = L.shape[1]
    cdef Py_ssize_t i, k = 0
    cdef int status = MAX_ITER

    cdef double[::1] x = np.array(x0, dtype=np.float64)
    cdef double[::1] y = np.array(y0, dtype=np.float64)
    lam_arr = np.empty(max_iter)
    alpha_arr = np.empty(max_iter)
    resP_arr = np.empty(max_iter)
    resD_arr = np.empty(max_iter)
    cdef double[::1] lam_h = lam_arr, alpha_h = alpha_arr, resP = resP_arr, resD = resD_arr
    X_arr = np.empty((max_iter + 1 if record else 1, n))
    Y_arr = np.empty((max_iter + 1 if record else 1, m))
    cdef double[:, ::1] X = X_arr, Y = Y_arr

    cdef int fcode = f[0], gcode = g[0]
    cdef double fs = f[1], gs = g[1]
    cdef const double[::1] fa = f[2], fb = f[3], ga = g[2], gb = g[3]
    cdef const double[:, ::1] fM = f[4], gM = g[4]

    cdef bint has_h = hG is not None
    cdef const double[:, ::1] G = hG if has_h else np.zeros((1, 1))
    cdef const double[::1] c = hc if has_h else np.zeros(1)

    cdef double[::1] Lx = np.zeros(m), Lty = np.zeros(n), Lxbar = np.zeros(m), Lu = np.zeros(m)
    cdef double[::1] Lxt = np.zeros(m), Ltybar = np.zeros(n), Ltyt = np.zeros(n)
    cdef double[::1] vx = np.zeros(n), xbar = np.zeros(n), xt = np.zeros(n), gx = np.zeros(n), tmpn = np.zeros(n)
    cdef double[::1] vy = np.zeros(m), vys = np.zeros(m), py = np.zeros(m), ybar = np.zeros(m), yt = np.zeros(m)
    cdef double[::1] tmpm = np.zeros(m)

    cdef double c2t = 2.0 - th
    cdef bint is_pos = th == 2.0
    cdef bint use_Lxt = mu != 1.0 or is_pos
    cdef bint use_Ltyt = mu != 0.0 or is_pos
    cdef bint need_Lx = use_Lxt or th != 1.0
    cdef bint track_Lx = need_Lx and (mu == 0.0 or is_pos)
    cdef bint track_Lty = use_Ltyt and (mu == 1.0 or is_pos)
    cdef double dx_coef = mu * g1 * c2t
    cdef double dy_coef = g2 * (1.0 - mu) * c2t
    cdef double vx_coef = (1.0 - mu) * g2 * (1.0 - th) * c2t
    cdef double vy_coef = mu * g1 * c2t
    cdef double vc_coef = 2.0 * ((1.0 - mu) * (1.0 - th) - mu)
    cdef double ig2 = 1.0 / g2
    cdef double gl = g2 * l_inv
    cdef double nx, ny, lx, ly, cross = 0.0, base, num, V, lam, alpha, rp, tol, zP
    cdef bint finite

    if record:
        for i in range(n):
            X[0, i] = x[i]
        for i in range(m):
            Y[0, i] = y[i]

    with nogil:
        if need_Lx:
            matvec(L, x, Lx)
        rmatvec(L, y, Lty)
        while k < max_iter:
            if not track_Lty:
                rmatvec(L, y, Lty)
            if need_Lx and not track_Lx:
                matvec(L, x, Lx)
            if has_h:
                matvec(G, x, gx)
                for i in range(n):
                    vx[i] = x[i] - g1 * (Lty[i] + (gx[i] + c[i]))
            else:
                for i in range(n):
                    vx[i] = x[i] - g1 * Lty[i]
            prox(fcode, fs, fa, fb, fM, vx, xbar, tmpn)
            matvec(L, xbar, Lxbar)
            if th == 1.0:
                for i in range(m):
                    Lu[i] = Lxbar[i]
            else:
                for i in range(m):
                    Lu[i] = (1.0 - th) * Lx[i] + th * Lxbar[i]
            for i in range(m):
                vy[i] = y[i] + g2 * Lu[i]
            if l_inv != 0.0:
                for i in range(m):
                    vy[i] = vy[i] - gl * y[i]
            for i in range(m):
                vys[i] = vy[i] * ig2
            prox(gcode, gs, ga, gb, gM, vys, py, tmpm)
            for i in range(m):
                ybar[i] = vy[i] - g2 * py[i]
            for i in range(n):
                xt[i] = xbar[i] - x[i]
            for i in range(m):
                yt[i] = ybar[i] - y[i]
            nx = dot(xt, xt)
            ny = dot(yt, yt)
            lx = 0.0
            ly = 0.0
            if use_Lxt:
                for i in range(m):
                    Lxt[i] = Lxbar[i] - Lx[i]
                cross = dot(Lxt, yt)
                lx = dot(Lxt, Lxt)
            if use_Ltyt:
                rmatvec(L, ybar, Ltybar)
                for i in range(n):
                    Ltyt[i] = Ltybar[i] - Lty[i]
                ly = dot(Ltyt, Ltyt)
                if not use_Lxt:
                    cross = dot(xt, Ltyt)
            base = nx / g1 + ny / g2
            num = base - th * cross
            V = base + vx_coef * lx + vy_coef * ly + vc_coef * cross
            if not (isfinite(nx) and isfinite(ny) and isfinite(V) and isfinite(num)):
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
                for i in range(n):
                    x[i] = x[i] + alpha * xt[i]
            else:
                for i in range(n):
                    x[i] = x[i] + alpha * (xt[i] - dx_coef * Ltyt[i])
            if is_pos or mu == 1.0:
                for i in range(m):
                    y[i] = y[i] + alpha * yt[i]
            else:
                for i in range(m):
                    y[i] = y[i] + alpha * (dy_coef * Lxt[i] + yt[i])
            if track_Lx:
                for i in range(m):
                    Lx[i] = Lx[i] + alpha * Lxt[i]
            if track_Lty:
                for i in range(n):
                    Lty[i] = Lty[i] + alpha * Ltyt[i]
            lam_h[k] = lam
            alpha_h[k] = alpha
            rp = sqrt(num) if num > 0.0 else 0.0
            resP[k] = rp
            resD[k] = sqrt(V) if V > 0.0 else 0.0
            k += 1
            if record:
                for i in range(n):
                    X[k, i] = x[i]
                for i in range(m):
                    Y[k, i] = y[i]
            finite = True
            for i in range(n):
                if not isfinite(x[i]):
                    finite = False
            for i in range(m):
                if not isfinite(y[i]):
                    finite = False
            if not finite:
                status = NONFINITE
                break
            tol = tol_abs
            if tol_rel != 0.0:
                matvec(L, x, tmpm)
                zP = dot(x, x) / g1 + dot(y, y) / g2 - th * dot(tmpm, y)
                tol = tol + tol_rel * sqrt(zP if zP > 0.0 else 0.0)
            if rp <= tol:
                status = CONVERGED
                break

    return (np.asarray(x).copy(), np.asarray(y).copy(), k, status,
            lam_arr[:k].copy(), alpha_arr[:k].copy(), resP_arr[:k].copy(), resD_arr[:k].copy(),
            X_arr[: k + 1].copy() if record else None, Y_arr[: k + 1].copy() if record else None)
