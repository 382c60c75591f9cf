# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled versions of the hot kernels (same signatures as ``_pykernels``)."""
import numpy as np

from libc.math cimport cos, sin, sqrt, fabs, fmod, INFINITY, M_PI

cdef double TWO_PI = 2.0 * M_PI
cdef double SLOPE_TOL = 1e-6


cdef struct Curve:
    const double* a0
    const double* A
    const double* B
    int M


cdef struct Target:
    int kind          # 0: (K - c).u ; 1: |K - c|^2 - r^2
    const double* c
    const double* u
    double r


cdef inline void _eval3(const Curve* cv, double t, double* x, double* dx, double* ddx) noexcept nogil:
    cdef double c1 = cos(t), s1 = sin(t)
    cdef double ck = c1, sk = s1, tmp, kk, a, b
    cdef int k, d
    for d in range(3):
        x[d] = cv.a0[d]
        dx[d] = 0.0
        ddx[d] = 0.0
    for k in range(cv.M):
        kk = k + 1.0
        for d in range(3):
            a = cv.A[3 * k + d]
            b = cv.B[3 * k + d]
            x[d] += a * ck + b * sk
            dx[d] += kk * (b * ck - a * sk)
            ddx[d] -= kk * kk * (a * ck + b * sk)
        tmp = ck * c1 - sk * s1
        sk = sk * c1 + ck * s1
        ck = tmp


cdef inline void _fn(const Curve* cv, const Target* tg, double t,
                     double* f, double* df, double* d2f) noexcept nogil:
    cdef double x[3]
    cdef double dx[3]
    cdef double ddx[3]
    cdef double rel[3]
    cdef int d
    _eval3(cv, t, x, dx, ddx)
    if tg.kind == 0:
        f[0] = 0.0
        df[0] = 0.0
        d2f[0] = 0.0
        for d in range(3):
            f[0] += (x[d] - tg.c[d]) * tg.u[d]
            df[0] += dx[d] * tg.u[d]
            d2f[0] += ddx[d] * tg.u[d]
    else:
        f[0] = -tg.r * tg.r
        df[0] = 0.0
        d2f[0] = 0.0
        for d in range(3):
            rel[d] = x[d] - tg.c[d]
            f[0] += rel[d] * rel[d]
            df[0] += 2.0 * rel[d] * dx[d]
            d2f[0] += 2.0 * (dx[d] * dx[d] + rel[d] * ddx[d])


cdef double _root(const Curve* cv, const Target* tg, double lo, double hi, int der) noexcept nogil:
    # safeguarded Newton on f (der=0) or f' (der=1) over a sign-change bracket
    cdef double f, df, d2f, g, dg, glo, ghi, t, tn
    cdef int it
    _fn(cv, tg, hi, &f, &df, &d2f)
    ghi = df if der else f
    _fn(cv, tg, lo, &f, &df, &d2f)
    glo = df if der else f
    if (glo > 0 and ghi > 0) or (glo < 0 and ghi < 0):
        # root on a grid node, sign lost on re-evaluation
        return lo if fabs(glo) <= fabs(ghi) else hi
    t = 0.5 * (lo + hi)
    for it in range(100):
        _fn(cv, tg, t, &f, &df, &d2f)
        if der:
            g = df
            dg = d2f
        else:
            g = f
            dg = df
        if g == 0.0:
            return t
        if (g > 0) == (glo > 0):
            lo = t
            glo = g
        else:
            hi = t
        if dg != 0.0:
            tn = t - g / dg
        else:
            tn = lo - 1.0
        if not (tn > lo and tn < hi):
            tn = 0.5 * (lo + hi)
        if fabs(tn - t) <= 1e-13 or hi - lo <= 1e-13:
            return tn
        t = tn
    return t


cdef int _grid_roots(const Curve* cv, const Target* tg, const double* F, int N,
                     double thr, double tol_f, double* roots, int cap) noexcept nogil:
    """Roots of one target function; returns count, or -1 when degenerate."""
    cdef double h = TWO_PI / N
    cdef int j, jm, jp, nr = 0
    cdef double f, df, d2f, dlo, dhi, te, fe, aj
    cdef int degenerate = 0
    for j in range(N):
        jp = j + 1 if j + 1 < N else 0
        if (F[j] >= 0) != (F[jp] >= 0):
            if nr < cap:
                roots[nr] = _root(cv, tg, j * h, j * h + h, 0)
                nr += 1
    for j in range(N):
        jp = j + 1 if j + 1 < N else 0
        jm = j - 1 if j > 0 else N - 1
        aj = fabs(F[j])
        if aj >= thr or aj > fabs(F[jm]) or aj > fabs(F[jp]):
            continue
        if (F[j] >= 0) != (F[jm] >= 0) or (F[j] >= 0) != (F[jp] >= 0):
            continue
        _fn(cv, tg, (j - 1) * h, &f, &dlo, &d2f)
        _fn(cv, tg, (j + 1) * h, &f, &dhi, &d2f)
        if not (dlo * dhi < 0):
            continue
        te = _root(cv, tg, (j - 1) * h, (j + 1) * h, 1)
        _fn(cv, tg, te, &fe, &df, &d2f)
        if (fe >= 0) != (F[j] >= 0):
            if nr + 1 < cap:
                roots[nr] = _root(cv, tg, (j - 1) * h, te, 0)
                roots[nr + 1] = _root(cv, tg, te, (j + 1) * h, 0)
                nr += 2
        elif fabs(fe) < tol_f:
            degenerate = 1
    if degenerate:
        return -1 - nr
    return nr


def plane_crossings(const double[::1] a0, const double[:, ::1] A, const double[:, ::1] B,
                    const double[:, ::1] P, const double[:, ::1] C, const double[:, ::1] U,
                    const double[::1] R, const double[:, ::1] W, int mode,
                    double thr, double tol_f, double tol_r):
    cdef Py_ssize_t n = C.shape[0], N = P.shape[0], i, j, q
    cdef int d, nr
    lam_a = np.zeros(n, dtype=np.int64)
    hits_a = np.zeros(n, dtype=np.int64)
    status_a = np.zeros(n, dtype=np.int8)
    cdef long long[::1] lam = lam_a
    cdef long long[::1] hits = hits_a
    cdef signed char[::1] status = status_a
    fbuf_a = np.empty(N)
    cdef double[::1] fbuf = fbuf_a
    cdef int cap = 4 * N + 8
    rbuf_a = np.empty(cap)
    cdef double[::1] rbuf = rbuf_a
    cdef Curve cv
    cdef Target tg
    cdef double x[3]
    cdef double dx[3]
    cdef double ddx[3]
    cdef double dist, s, cu, slope
    cv.a0 = &a0[0]
    cv.A = &A[0, 0] if A.shape[0] > 0 else NULL
    cv.B = &B[0, 0] if B.shape[0] > 0 else NULL
    cv.M = <int>A.shape[0]
    tg.kind = 0
    tg.r = 0.0
    with nogil:
        for i in range(n):
            tg.c = &C[i, 0]
            tg.u = &U[i, 0]
            cu = C[i, 0] * U[i, 0] + C[i, 1] * U[i, 1] + C[i, 2] * U[i, 2]
            for j in range(N):
                fbuf[j] = P[j, 0] * U[i, 0] + P[j, 1] * U[i, 1] + P[j, 2] * U[i, 2] - cu
            nr = _grid_roots(&cv, &tg, &fbuf[0], <int>N, thr, tol_f, &rbuf[0], cap)
            if nr < 0:
                status[i] = 1
                nr = -1 - nr
            for q in range(nr):
                _eval3(&cv, rbuf[q], x, dx, ddx)
                slope = dx[0] * U[i, 0] + dx[1] * U[i, 1] + dx[2] * U[i, 2]
                # double roots: the curve grazes the plane
                if fabs(slope) < SLOPE_TOL * sqrt(dx[0] * dx[0] + dx[1] * dx[1] + dx[2] * dx[2]):
                    status[i] = 1
                if mode == 0:
                    dist = 0.0
                    for d in range(3):
                        dist += (x[d] - C[i, d]) * (x[d] - C[i, d])
                    dist = sqrt(dist)
                    if fabs(dist - R[i]) < tol_r * R[i]:
                        status[i] = 1
                    if dist <= R[i]:
                        hits[i] += 1
                        lam[i] += 1 if slope > 0 else (-1 if slope < 0 else 0)
                else:
                    s = 0.0
                    for d in range(3):
                        s += (x[d] - C[i, d]) * W[i, d]
                    if fabs(s) < tol_f:
                        status[i] = 1
                    if s >= 0:
                        hits[i] += 1
                        lam[i] += 1 if slope > 0 else (-1 if slope < 0 else 0)
    return lam_a, hits_a, status_a


def ball_param_lengths(const double[::1] a0, const double[:, ::1] A, const double[:, ::1] B,
                       const double[:, ::1] P, const double[:, ::1] C, const double[::1] R,
                       double thr, double tol_f):
    cdef Py_ssize_t n = C.shape[0], N = P.shape[0], i, j, q
    cdef int d, nr
    out_a = np.zeros(n)
    status_a = np.zeros(n, dtype=np.int8)
    cdef double[::1] out = out_a
    cdef signed char[::1] status = status_a
    fbuf_a = np.empty(N)
    cdef double[::1] fbuf = fbuf_a
    cdef int cap = 4 * N + 8
    rbuf_a = np.empty(cap)
    cdef double[::1] rbuf = rbuf_a
    cdef Curve cv
    cdef Target tg
    cdef double f, df, d2f, acc, tm, v
    cv.a0 = &a0[0]
    cv.A = &A[0, 0] if A.shape[0] > 0 else NULL
    cv.B = &B[0, 0] if B.shape[0] > 0 else NULL
    cv.M = <int>A.shape[0]
    tg.kind = 1
    tg.u = NULL
    with nogil:
        for i in range(n):
            tg.c = &C[i, 0]
            tg.r = R[i]
            for j in range(N):
                acc = -R[i] * R[i]
                for d in range(3):
                    v = P[j, d] - C[i, d]
                    acc += v * v
                fbuf[j] = acc
            nr = _grid_roots(&cv, &tg, &fbuf[0], <int>N, thr, tol_f, &rbuf[0], cap)
            if nr < 0:
                status[i] = 1
                nr = -1 - nr
            acc = TWO_PI if fbuf[0] < 0 else 0.0
            for q in range(nr):
                _fn(&cv, &tg, rbuf[q], &f, &df, &d2f)
                tm = fmod(rbuf[q], TWO_PI)
                if tm < 0:
                    tm += TWO_PI
                acc += tm if df > 0 else -tm
            out[i] = acc
    return out_a, status_a


def nt_status(const double[:, ::1] Bp, const long long[::1] cid, int ncomp,
              const double[:, ::1] W, const double[:, ::1] Z, double tol):
    cdef Py_ssize_t n = W.shape[0], M = Bp.shape[0], i, j
    cdef int k, cb, ncb
    if ncomp > 20:
        raise ValueError("too many boundary components")
    ncb = 1 << ncomp
    out_a = np.empty(n, dtype=np.int64)
    cdef long long[::1] out = out_a
    bnd_a = np.empty((ncomp, 4))
    cdef double[:, ::1] bnd = bnd_a
    cdef double mx, my, dzx, dzy, a2, nn, nx, ny, rx, ry, alpha, beta, ratio
    cdef double lo, hi, best, width
    with nogil:
        for i in range(n):
            mx = 0.5 * (W[i, 0] + Z[i, 0])
            my = 0.5 * (W[i, 1] + Z[i, 1])
            dzx = Z[i, 0] - W[i, 0]
            dzy = Z[i, 1] - W[i, 1]
            a2 = dzx * dzx + dzy * dzy
            nn = sqrt(a2)
            nx = -dzy / nn
            ny = dzx / nn
            for k in range(ncomp):
                bnd[k, 0] = -INFINITY  # outside lo
                bnd[k, 1] = INFINITY   # outside hi
                bnd[k, 2] = -INFINITY  # inside lo
                bnd[k, 3] = INFINITY   # inside hi
            for j in range(M):
                k = <int>cid[j]
                rx = Bp[j, 0] - mx
                ry = Bp[j, 1] - my
                alpha = rx * rx + ry * ry - 0.25 * a2
                beta = rx * nx + ry * ny
                if beta > 0:
                    ratio = alpha / (2.0 * beta)
                    if ratio < bnd[k, 1]:
                        bnd[k, 1] = ratio
                    if ratio > bnd[k, 2]:
                        bnd[k, 2] = ratio
                elif beta < 0:
                    ratio = alpha / (2.0 * beta)
                    if ratio > bnd[k, 0]:
                        bnd[k, 0] = ratio
                    if ratio < bnd[k, 3]:
                        bnd[k, 3] = ratio
                else:
                    if alpha <= 0:
                        bnd[k, 0] = INFINITY
                    if alpha >= 0:
                        bnd[k, 2] = INFINITY
            best = -INFINITY
            for cb in range(ncb):
                lo = -INFINITY
                hi = INFINITY
                for k in range(ncomp):
                    if (cb >> k) & 1:
                        if bnd[k, 2] > lo:
                            lo = bnd[k, 2]
                        if bnd[k, 3] < hi:
                            hi = bnd[k, 3]
                    else:
                        if bnd[k, 0] > lo:
                            lo = bnd[k, 0]
                        if bnd[k, 1] < hi:
                            hi = bnd[k, 1]
                if lo == INFINITY or hi == -INFINITY:
                    continue
                width = hi - lo
                if width > best:
                    best = width
            if best > tol:
                out[i] = 0
            elif best < -tol:
                out[i] = 1
            else:
                out[i] = 2
    return out_a
