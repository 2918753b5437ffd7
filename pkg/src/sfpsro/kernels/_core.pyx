# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled regret-matching+ and min-norm-point Frank-Wolfe kernels.

Mirrors ``_fallback`` operation for operation so both backends agree to round-off.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport INFINITY, fabs, isfinite

cnp.import_array()


cdef inline void _strategy(double[::1] q, double[::1] out, Py_ssize_t n) noexcept nogil:
    cdef double s = 0.0
    cdef Py_ssize_t i
    for i in range(n):
        s += q[i]
    if s > 0.0:
        for i in range(n):
            out[i] = q[i] / s
    else:
        for i in range(n):
            out[i] = 1.0 / n


def rm_plus_symmetric(P_in, long max_iter, double tol, long check_every):
    cdef double[:, ::1] P = np.ascontiguousarray(P_in, dtype=np.float64)
    cdef Py_ssize_t n = P.shape[0]
    cdef double[::1] q = np.zeros(n)
    cdef double[::1] x = np.zeros(n)
    cdef double[::1] u = np.zeros(n)
    avg_arr = np.zeros(n)
    cdef double[::1] avg = avg_arr
    cdef double weight = 0.0, xu, best, val, residual = INFINITY
    cdef Py_ssize_t i, j
    cdef long it = 0, t
    with nogil:
        for t in range(1, max_iter + 1):
            it = t
            _strategy(q, x, n)
            xu = 0.0
            for i in range(n):
                val = 0.0
                for j in range(n):
                    val += P[i, j] * x[j]
                u[i] = val
                xu += x[i] * val
            for i in range(n):
                val = q[i] + u[i] - xu
                q[i] = val if val > 0.0 else 0.0
                avg[i] += t * x[i]
            weight += t
            if t % check_every == 0 or t == max_iter:
                best = -INFINITY
                xu = 0.0
                for i in range(n):
                    val = 0.0
                    for j in range(n):
                        val += P[i, j] * avg[j]
                    val /= weight
                    if val > best:
                        best = val
                    xu += avg[i] / weight * val
                residual = best - xu
                if residual <= tol:
                    break
    return avg_arr / weight, residual, it


def rm_plus_bimatrix(A_in, long max_iter, double tol, long check_every):
    cdef double[:, ::1] A = np.ascontiguousarray(A_in, dtype=np.float64)
    cdef Py_ssize_t m = A.shape[0], n = A.shape[1]
    cdef double[::1] qx = np.zeros(m)
    cdef double[::1] qy = np.zeros(n)
    cdef double[::1] x = np.zeros(m)
    cdef double[::1] y = np.zeros(n)
    cdef double[::1] ux = np.zeros(m)
    cdef double[::1] uy = np.zeros(n)
    ax_arr = np.zeros(m)
    ay_arr = np.zeros(n)
    cdef double[::1] ax = ax_arr
    cdef double[::1] ay = ay_arr
    cdef double weight = 0.0, dot, val, hi, lo, gap = INFINITY
    cdef Py_ssize_t i, j
    cdef long it = 0, t
    with nogil:
        _strategy(qy, y, n)
        for t in range(1, max_iter + 1):
            it = t
            _strategy(qx, x, m)
            dot = 0.0
            for i in range(m):
                val = 0.0
                for j in range(n):
                    val += A[i, j] * y[j]
                ux[i] = val
                dot += x[i] * val
            for i in range(m):
                val = qx[i] + ux[i] - dot
                qx[i] = val if val > 0.0 else 0.0
            _strategy(qx, x, m)
            for j in range(n):
                uy[j] = 0.0
            for i in range(m):
                for j in range(n):
                    uy[j] -= x[i] * A[i, j]
            dot = 0.0
            for j in range(n):
                dot += uy[j] * y[j]
            for j in range(n):
                val = qy[j] + uy[j] - dot
                qy[j] = val if val > 0.0 else 0.0
            _strategy(qy, y, n)
            for i in range(m):
                ax[i] += t * x[i]
            for j in range(n):
                ay[j] += t * y[j]
            weight += t
            if t % check_every == 0 or t == max_iter:
                hi = -INFINITY
                for i in range(m):
                    val = 0.0
                    for j in range(n):
                        val += A[i, j] * ay[j]
                    val /= weight
                    if val > hi:
                        hi = val
                lo = INFINITY
                for j in range(n):
                    val = 0.0
                    for i in range(m):
                        val += ax[i] * A[i, j]
                    val /= weight
                    if val < lo:
                        lo = val
                gap = hi - lo
                if gap <= tol:
                    break
    return ax_arr / weight, ay_arr / weight, gap, it


cdef bint _solve(double[:, ::1] M, double[::1] x, Py_ssize_t n) noexcept nogil:
    """In-place Gaussian elimination with partial pivoting; M is n x (n + 1)."""
    cdef Py_ssize_t i, j, r, piv
    cdef double best, f, tmp
    for i in range(n):
        piv = i
        best = fabs(M[i, i])
        for r in range(i + 1, n):
            if fabs(M[r, i]) > best:
                best = fabs(M[r, i])
                piv = r
        if best == 0.0:
            return False
        if piv != i:
            for j in range(i, n + 1):
                tmp = M[i, j]
                M[i, j] = M[piv, j]
                M[piv, j] = tmp
        for r in range(i + 1, n):
            f = M[r, i] / M[i, i]
            if f != 0.0:
                for j in range(i, n + 1):
                    M[r, j] -= f * M[i, j]
    for i in range(n - 1, -1, -1):
        tmp = M[i, n]
        for j in range(i + 1, n):
            tmp -= M[i, j] * x[j]
        x[i] = tmp / M[i, i]
    return True


def fw_simplex_qp(G_in, b_in, double c, long max_iter, double gap_tol):
    cdef double[:, ::1] G = np.ascontiguousarray(G_in, dtype=np.float64)
    cdef double[::1] b = np.ascontiguousarray(b_in, dtype=np.float64)
    cdef Py_ssize_t k = b.shape[0]
    H_arr = np.empty((k, k))
    cdef double[:, ::1] H = H_arr
    w_arr = np.zeros(k)
    cdef double[::1] w = w_arr
    cdef double[::1] Hw = np.zeros(k)
    cdef double[:, ::1] M = np.zeros((k + 1, k + 2))
    cdef double[::1] v = np.zeros(k + 1)
    cdef Py_ssize_t[::1] active = np.zeros(k, dtype=np.intp)
    cdef Py_ssize_t na = 0, i, j, s, n, m
    cdef long it = 0, t
    cdef double scale = 1.0, gap, wHw, theta, vmax, val, value
    cdef bint inside, dup, ok, done = False
    with nogil:
        s = 0
        for i in range(k):
            for j in range(k):
                H[i, j] = G[i, j] - b[i] - b[j] + c
                if fabs(H[i, j]) > scale:
                    scale = fabs(H[i, j])
            if H[i, i] < H[s, s]:
                s = i
        w[s] = 1.0
        active[0] = s
        na = 1
        for t in range(1, max_iter + 1):
            it = t
            wHw = 0.0
            s = 0
            for i in range(k):
                val = 0.0
                for j in range(k):
                    val += H[i, j] * w[j]
                Hw[i] = val
                wHw += w[i] * val
                if val < Hw[s]:
                    s = i
            gap = 2.0 * (wHw - Hw[s])
            if gap <= gap_tol:
                break
            dup = False
            for i in range(na):
                if active[i] == s:
                    dup = True
            if dup:
                break
            active[na] = s
            na += 1
            while True:
                n = na
                for i in range(n):
                    for j in range(n):
                        M[i, j] = H[active[i], active[j]]
                    M[i, n] = 1.0
                    M[i, n + 1] = 0.0
                for j in range(n):
                    M[n, j] = 1.0
                M[n, n] = 0.0
                M[n, n + 1] = 1.0
                ok = _solve(M[:n + 1, :n + 2], v, n + 1)
                vmax = 0.0
                if ok:
                    for i in range(n):
                        if not isfinite(v[i]):
                            ok = False
                        elif fabs(v[i]) > vmax:
                            vmax = fabs(v[i])
                if not ok or vmax * 1e-12 > 1.0 / scale:
                    # affinely dependent active set: keep the current iterate
                    done = True
                    break
                inside = True
                for i in range(n):
                    if v[i] <= 0.0:
                        inside = False
                if inside:
                    for i in range(k):
                        w[i] = 0.0
                    for i in range(n):
                        w[active[i]] = v[i]
                    break
                theta = INFINITY
                for i in range(n):
                    if v[i] <= 0.0:
                        val = w[active[i]] / (w[active[i]] - v[i])
                        if val < theta:
                            theta = val
                m = 0
                for i in range(n):
                    val = w[active[i]] + theta * (v[i] - w[active[i]])
                    if val < 1e-15:
                        val = 0.0
                    w[active[i]] = val
                for i in range(n):
                    if w[active[i]] > 0.0:
                        active[m] = active[i]
                        m += 1
                na = m
            if done:
                break
        value = 0.0
        for i in range(k):
            val = 0.0
            for j in range(k):
                val += H[i, j] * w[j]
            value += w[i] * val
    return w_arr, (value if value > 0.0 else 0.0), it
