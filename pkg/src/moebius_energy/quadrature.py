"""Pair densities and double-integral quadratures over products of curves.

All double integrals are taken against arc length on both factors.  Three
situations occur:

* smooth periodic integrands (separated curves, or self-pairs with a known
  diagonal limit): tensor periodic trapezoid rule;
* cutoff integrals over ``|q - p| > eps``: for each row ``p`` the excluded
  parameter interval is located by Newton's method and the remaining arc is
  integrated with Gauss-Legendre panels graded toward both ends;
* nearly singular pairs (a curve and its parallel at distance delta):
  the same graded panels centered on the nearest point.
"""
from __future__ import annotations

from functools import lru_cache
from typing import Callable

import numpy as np

from .curves import TWO_PI, ClosedCurve, GeometryError, eval_frame, uniform_grid

Density = Callable[[np.ndarray, np.ndarray, np.ndarray, np.ndarray], np.ndarray]


@lru_cache(maxsize=64)
def gauss_legendre(n: int):
    x, w = np.polynomial.legendre.leggauss(n)
    return x, w


@lru_cache(maxsize=64)
def graded_rule(levels: int, n: int = 16, max_width: float = 0.5):
    """Nodes/weights on (0, 1), geometrically graded toward both endpoints.

    Breakpoints on the left half are ``0, 2**-(levels+1), ..., 1/4, 1/2``;
    panels wider than ``max_width`` are split evenly.  The right half
    mirrors the left.
    """
    x, w = gauss_legendre(n)
    br = np.concatenate([[0.0], 0.5 ** np.arange(levels + 1, 0, -1)])
    nodes, weights = [], []
    for a, b in zip(br[:-1], br[1:]):
        k = max(1, int(np.ceil((b - a) / max_width - 1e-12)))
        for j in range(k):
            lo, hi = a + (b - a) * j / k, a + (b - a) * (j + 1) / k
            h = 0.5 * (hi - lo)
            nodes.append(lo + h * (x + 1))
            weights.append(h * w)
    left = np.concatenate(nodes)
    lw = np.concatenate(weights)
    return np.concatenate([left, 1.0 - left[::-1]]), np.concatenate([lw, lw[::-1]])


# ---------------------------------------------------------------------------
# pair densities (arguments broadcast; tangents are unit vectors)


def _cross(u, v):
    if u.shape[-1] == 2:
        return u[..., 0] * v[..., 1] - u[..., 1] * v[..., 0]
    return np.cross(u, v)


def sinsin_density(P, Tp, Q, Tq):
    """``cos(tau) sin(theta_p) sin(theta_q) / r**2`` as ``(n_p . n_q) / r**4``."""
    d = Q - P
    r2 = (d * d).sum(-1)
    n_p = _cross(Tp, d)
    n_q = _cross(Tq, d)
    if d.shape[-1] == 3:
        num = (n_p * n_q).sum(-1)
    else:
        num = n_p * n_q
    return num / (r2 * r2)


def coscos_density(P, Tp, Q, Tq):
    """``cos(theta_p) cos(theta_q) / r**2``."""
    d = Q - P
    r2 = (d * d).sum(-1)
    return (Tp * d).sum(-1) * (Tq * d).sum(-1) / (r2 * r2)


def dots_density(P, Tp, Q, Tq):
    """``(T_p . T_q) / r**2``."""
    d = Q - P
    return (Tp * Tq).sum(-1) / (d * d).sum(-1)


def writhe_density(P, Tp, Q, Tq):
    """``sin(tau) sin(theta_p) sin(theta_q) / r**2 = (T_p x T_q) . (p - q) / r**3``."""
    d = P - Q
    r2 = (d * d).sum(-1)
    return (np.cross(Tp, Tq) * d).sum(-1) / (r2 * np.sqrt(r2))


DENSITIES: dict[str, Density] = {
    "sinsin": sinsin_density,
    "coscos": coscos_density,
    "dots": dots_density,
    "writhe": writhe_density,
}


# ---------------------------------------------------------------------------
# quadratures


def _frames_on_grid(curve: ClosedCurve, n: int):
    P = curve.sample(n)
    D1 = curve.sample(n, 1)
    sp = np.linalg.norm(D1, axis=1)
    return P, D1 / sp[:, None], sp


def torus_sum(
    K1: ClosedCurve,
    K2: ClosedCurve,
    density: Density,
    n1: int,
    n2: int | None = None,
    *,
    diagonal: np.ndarray | None = None,
    chunk: int = 256,
) -> float:
    """Trapezoid approximation of ``\\iint density dp dq`` over ``K1 x K2``.

    For self-pairs pass ``K2 is K1``, ``n2 == n1`` and the diagonal limit
    values (length ``n1``) in ``diagonal``.
    """
    n2 = n2 or n1
    P, Tp, sp = _frames_on_grid(K1, n1)
    Q, Tq, sq = _frames_on_grid(K2, n2)
    self_pair = diagonal is not None
    total = 0.0
    for i in range(0, n1, chunk):
        sl = slice(i, min(i + chunk, n1))
        with np.errstate(invalid="ignore", divide="ignore"):
            F = density(P[sl, None, :], Tp[sl, None, :], Q[None, :, :], Tq[None, :, :])
        if self_pair:
            rows = np.arange(sl.start, sl.stop)
            F[rows - sl.start, rows] = diagonal[rows]
        total += float((F * sq[None, :]).sum(axis=1) @ sp[sl])
    return total * (TWO_PI / n1) * (TWO_PI / n2)


def torus_grid(K1: ClosedCurve, K2: ClosedCurve, density: Density, n1: int, n2: int | None = None):
    """Full grid of the density values (for diagnostics and small grids)."""
    n2 = n2 or n1
    P, Tp, _ = _frames_on_grid(K1, n1)
    Q, Tq, _ = _frames_on_grid(K2, n2)
    with np.errstate(invalid="ignore", divide="ignore"):
        return density(P[:, None, :], Tp[:, None, :], Q[None, :, :], Tq[None, :, :])


def excluded_interval(curve: ClosedCurve, s: np.ndarray, eps: float, *, iters: int = 60):
    """Parameters ``tau_minus < 0 < tau_plus`` with ``|K(s+tau) - K(s)| = eps``."""
    P0 = curve.evaluate(s)
    sp = curve.speed(s)
    out = []
    for sign in (1.0, -1.0):
        tau = sign * eps / sp
        for _ in range(iters):
            d = curve.evaluate(s + tau) - P0
            g = (d * d).sum(-1) - eps * eps
            gp = 2.0 * (d * curve.evaluate(s + tau, 1)).sum(-1)
            step = g / gp
            # keep tau on its side of the diagonal
            new = tau - step
            bad = (new * sign <= 0) | (np.abs(new) >= np.pi)
            new = np.where(bad, 0.5 * tau, new)
            done = np.abs(new - tau) <= 1e-15 * np.maximum(1.0, np.abs(tau))
            tau = new
            if np.all(done):
                break
        out.append(tau)
    return out[1], out[0]


def _levels_for(ratio_min: float) -> int:
    return int(np.clip(np.ceil(np.log2(1.0 / max(ratio_min, 1e-300))) - 1, 2, 60))


def cutoff_self_integral(
    curve: ClosedCurve,
    density: Density,
    eps: float,
    *,
    n_rows: int | None = None,
    n_gl: int = 16,
) -> float:
    """``\\iint_{|q-p|>eps} density dp dq`` over ``K x K``.

    Assumes ``{t : |K(t) - K(s)| <= eps}`` is a single interval around ``s``;
    this is verified on the quadrature nodes and a ``GeometryError`` is
    raised when another arc of the curve enters the eps-ball.
    """
    n_rows = n_rows or curve.default_n(256)
    s = uniform_grid(n_rows)
    tm, tp = excluded_interval(curve, s, eps)
    H = TWO_PI + tm - tp
    levels = _levels_for(float(np.min(np.minimum(tp, -tm) / H)))
    f, w = graded_rule(levels, n_gl)
    T = s[:, None] + tp[:, None] + H[:, None] * f[None, :]
    W = H[:, None] * w[None, :]
    fp = eval_frame(curve, s)
    P = fp.point[:, None, :]
    Tp = fp.tangent[:, None, :]
    total = 0.0
    chunk = max(1, 400_000 // T.shape[1])
    for i in range(0, n_rows, chunk):
        sl = slice(i, i + chunk)
        fq = eval_frame(curve, T[sl])
        d = fq.point - P[sl]
        r = np.sqrt((d * d).sum(-1))
        if np.any(r < eps * (1 - 1e-7)):
            raise GeometryError(
                f"cutoff eps={eps:.3g} too large: a distant arc of the curve comes within eps"
            )
        F = density(P[sl], Tp[sl], fq.point, fq.tangent)
        total += float(((F * fq.speed * W[sl]).sum(1)) @ fp.speed[sl])
    return total * TWO_PI / n_rows


def near_pair_integral(
    K: ClosedCurve,
    Kd: ClosedCurve,
    density: Density,
    scale: float,
    *,
    n_rows: int | None = None,
    n_gl: int = 16,
) -> float:
    """``\\iint density dp dq`` over ``K x Kd`` when ``Kd(t)`` is within ``scale`` of ``K(t)``.

    Rows are integrated with panels graded toward ``t = s``, where the
    integrand peaks with width about ``scale``.
    """
    n_rows = n_rows or K.default_n(256)
    s = uniform_grid(n_rows)
    fp = eval_frame(K, s)
    ratio = scale / float(fp.speed.max()) / TWO_PI
    f, w = graded_rule(_levels_for(ratio), n_gl)
    total = 0.0
    chunk = max(1, 400_000 // f.size)
    for i in range(0, n_rows, chunk):
        sl = slice(i, i + chunk)
        T = s[sl, None] + TWO_PI * f[None, :]
        fq = eval_frame(Kd, T)
        F = density(fp.point[sl, None, :], fp.tangent[sl, None, :], fq.point, fq.tangent)
        total += float(((F * fq.speed) @ (TWO_PI * w)) @ fp.speed[sl])
    return total * TWO_PI / n_rows


def system_cutoff_integral(curves, density: Density, eps: float, n: int | None = None) -> float:
    """Cutoff integral over a multi-component system (cross pairs need separation > eps)."""
    total = 0.0
    for i, Ki in enumerate(curves):
        for j, Kj in enumerate(curves):
            if i == j:
                total += cutoff_self_integral(Ki, density, eps, n_rows=n)
            else:
                ni = n or Ki.default_n(256)
                nj = n or Kj.default_n(256)
                total += torus_sum(Ki, Kj, density, ni, nj)
    return total
