"""Pure numpy implementations of the hot kernels.

Signatures match the compiled module ``_ckernels`` exactly; the wrappers in
``kernels/__init__.py`` prepare the arrays and thresholds for both.
"""
from __future__ import annotations

import numpy as np

from ..roots import bracketed_newton

TWO_PI = 2.0 * np.pi
SLOPE_TOL = 1e-6


def _fourier3(a0, A, B, t):
    k = np.arange(1, A.shape[0] + 1, dtype=float)
    kt = t[:, None] * k
    c, s = np.cos(kt), np.sin(kt)
    x = a0 + c @ A + s @ B
    dx = (-s * k) @ A + (c * k) @ B
    ddx = (-c * k * k) @ A + (-s * k * k) @ B
    return x, dx, ddx


def _grid_roots(F, fun, thr, tol_f):
    """Roots of each row function from its grid samples ``F`` (rows x N).

    Sign changes between neighbours are refined directly.  Near a small
    local minimum of ``|f|`` without a sign change the extremum is located
    and, if the function dips through zero there, both roots are added.
    Returns ``(rows, t, degenerate_rows)``.
    """
    n, N = F.shape
    h = TWO_PI / N
    tg = np.arange(N) * h
    pos = F >= 0
    nxt = np.roll(pos, -1, axis=1)
    r1, c1 = np.nonzero(pos != nxt)

    def newton(rows, lo, hi, der=False):
        k = 1 if der else 0
        return bracketed_newton(
            lambda t: fun(rows, t)[k], lambda t: fun(rows, t)[k + 1], lo, hi, tol=1e-13
        )

    t1 = newton(r1, tg[c1], tg[c1] + h)
    rows, ts = [r1], [t1]

    A = np.abs(F)
    prv = np.roll(pos, 1, axis=1)
    cand = (pos == prv) & (pos == nxt) & (A < thr) & (A <= np.roll(A, 1, 1)) & (A <= np.roll(A, -1, 1))
    r2, c2 = np.nonzero(cand)
    degenerate = np.zeros(0, dtype=np.int64)
    if r2.size:
        lo2, hi2 = tg[c2] - h, tg[c2] + h
        d_lo = fun(r2, lo2)[1]
        d_hi = fun(r2, hi2)[1]
        ok = d_lo * d_hi < 0
        r2, c2, lo2, hi2 = r2[ok], c2[ok], lo2[ok], hi2[ok]
        te = newton(r2, lo2, hi2, der=True)
        fe = fun(r2, te)[0]
        cross = (fe >= 0) != pos[r2, c2]
        degenerate = r2[~cross & (np.abs(fe) < tol_f)]
        r3, lo3, te3, hi3 = r2[cross], lo2[cross], te[cross], hi2[cross]
        rows += [r3, r3]
        ts += [newton(r3, lo3, te3), newton(r3, te3, hi3)]
    return np.concatenate(rows), np.concatenate(ts), degenerate


def plane_crossings(a0, A, B, P, C, U, R, W, mode, thr, tol_f, tol_r):
    """Signed and unsigned counts of crossings of a curve through disks or half-planes.

    ``mode == 0``: disk of radius ``R[i]`` centered at ``C[i]`` with normal
    ``U[i]``.  ``mode == 1``: half-plane through ``C[i]`` with normal
    ``U[i]``, bounded by a line, extending in direction ``W[i]``.
    Returns ``(lam, hits, status)``; ``status`` is 1 for near-tangent samples.
    """
    n = C.shape[0]
    F = P @ U.T
    F = F.T - (C * U).sum(-1)[:, None]

    def fun(rows, t):
        x, dx, ddx = _fourier3(a0, A, B, t)
        u = U[rows]
        return ((x - C[rows]) * u).sum(-1), (dx * u).sum(-1), (ddx * u).sum(-1)

    rows, t, deg = _grid_roots(F, fun, thr, tol_f)
    status = np.zeros(n, dtype=np.int8)
    status[deg] = 1
    x, dx, _ = _fourier3(a0, A, B, t)
    rel = x - C[rows]
    if mode == 0:
        d = np.linalg.norm(rel, axis=-1)
        rad = R[rows]
        inside = d <= rad
        status[rows[np.abs(d - rad) < tol_r * rad]] = 1
    else:
        s = (rel * W[rows]).sum(-1)
        inside = s >= 0
        status[rows[np.abs(s) < tol_f]] = 1
    slope = (dx * U[rows]).sum(-1)
    # double roots: the curve grazes the plane
    status[rows[np.abs(slope) < SLOPE_TOL * np.linalg.norm(dx, axis=-1)]] = 1
    sgn = np.sign(slope)
    lam = np.bincount(rows, weights=inside * sgn, minlength=n)
    hits = np.bincount(rows, weights=inside.astype(float), minlength=n)
    return np.rint(lam).astype(np.int64), np.rint(hits).astype(np.int64), status


def ball_param_lengths(a0, A, B, P, C, R, thr, tol_f):
    """Parameter measure of ``{t : |K(t) - C[i]| <= R[i]}`` for each ball."""
    n = C.shape[0]
    G = ((P[None, :, :] - C[:, None, :]) ** 2).sum(-1) - (R * R)[:, None]

    def fun(rows, t):
        x, dx, ddx = _fourier3(a0, A, B, t)
        rel = x - C[rows]
        return (
            (rel * rel).sum(-1) - R[rows] ** 2,
            2.0 * (rel * dx).sum(-1),
            2.0 * ((dx * dx).sum(-1) + (rel * ddx).sum(-1)),
        )

    rows, t, deg = _grid_roots(G, fun, thr, tol_f)
    slope = fun(rows, t)[1]
    tm = np.mod(t, TWO_PI)
    contrib = np.where(slope > 0, tm, -tm)
    out = np.bincount(rows, weights=contrib, minlength=n) + TWO_PI * (G[:, 0] < 0)
    status = np.zeros(n, dtype=np.int8)
    status[deg] = 1
    return out, status


def nt_status(Bp, cid, ncomp, W, Z, tol):
    """Classify pairs ``(W[i], Z[i])``: 0 some circle through both misses the
    boundary samples ``Bp``, 1 every circle meets it, 2 inconclusive.
    """
    n = W.shape[0]
    out = np.empty(n, dtype=np.int64)
    combos = np.array(np.meshgrid(*[[0, 1]] * ncomp, indexing="ij")).reshape(ncomp, -1).T
    for i0 in range(0, n, 256):
        w, z = W[i0 : i0 + 256], Z[i0 : i0 + 256]
        m = 0.5 * (w + z)
        dz = z - w
        a2 = (dz * dz).sum(-1)
        nperp = np.stack([-dz[:, 1], dz[:, 0]], axis=1) / np.sqrt(a2)[:, None]
        rel = Bp[None, :, :] - m[:, None, :]
        alpha = (rel * rel).sum(-1) - 0.25 * a2[:, None]
        beta = (rel * nperp[:, None, :]).sum(-1)
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = alpha / (2.0 * beta)
        pos, neg, zer = beta > 0, beta < 0, beta == 0
        bounds = np.empty((w.shape[0], ncomp, 2, 2))
        for k in range(ncomp):
            sel = cid == k
            rk, pk, nk, zk, ak = ratio[:, sel], pos[:, sel], neg[:, sel], zer[:, sel], alpha[:, sel]
            # outside: alpha - 2 sigma beta > 0
            lo_o = np.where(nk, rk, -np.inf).max(1)
            hi_o = np.where(pk, rk, np.inf).min(1)
            lo_o = np.where((zk & (ak <= 0)).any(1), np.inf, lo_o)
            # inside: alpha - 2 sigma beta < 0
            lo_i = np.where(pk, rk, -np.inf).max(1)
            hi_i = np.where(nk, rk, np.inf).min(1)
            lo_i = np.where((zk & (ak >= 0)).any(1), np.inf, lo_i)
            bounds[:, k, 0] = np.stack([lo_o, hi_o], 1)
            bounds[:, k, 1] = np.stack([lo_i, hi_i], 1)
        best = np.full(w.shape[0], -np.inf)
        for cb in combos:
            lo = np.max(bounds[:, np.arange(ncomp), cb, 0], axis=1)
            hi = np.min(bounds[:, np.arange(ncomp), cb, 1], axis=1)
            with np.errstate(invalid="ignore"):
                width = hi - lo
            best = np.maximum(best, np.nan_to_num(width, nan=-np.inf))
        out[i0 : i0 + 256] = np.where(best > tol, 0, np.where(best < -tol, 1, 2))
    return out
