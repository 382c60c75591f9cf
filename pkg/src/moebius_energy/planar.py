"""Energies of planar domains and their boundary curves.

Conventions: every boundary curve is oriented with the domain on its left
(outer boundaries counterclockwise, holes clockwise); ``dp`` is arc length.

Routes implemented here:

* ``potential``         the renormalized r^-4 potential V(w, Omega)
* ``domain_energy``     E(Omega) from the area integral of V with counterterm
* ``curve_energy``      E(K) from the limit-free sin*sin double integral
* ``curve_energy_cutoff`` E(K) and E(Omega) from the dots / cos*cos cutoff forms
* ``convex_chord_energy``, ``segment_energy``, ``nt_energy``  line/circle geometry
* ``tangent_circle_energy``, ``pair_theta_energy``  tangent-circle angle forms
* ``mutual_energy_area``, ``mutual_energy_contour``  E(Omega_1, Omega_2)
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import kernels
from .curves import (
    TWO_PI,
    ClosedCurve,
    DegenerateCurveError,
    GeometryError,
    OffsetError,
    PlanarDomain,
    ReliabilityWarning,
    _curve_distance,
    closest_point,
    eval_frame,
    uniform_grid,
    winding_number,
)
from .quadrature import (
    graded_rule,
    coscos_density,
    dots_density,
    gauss_legendre,
    sinsin_density,
    system_cutoff_integral,
    torus_sum,
)
from .renorm import DivergenceModel, RenormResult, extrapolate, fit_coefficients, geometric_ladder
from .roots import bracketed_newton, sign_change_brackets

PI2 = np.pi**2
DISK_DOMAIN_ENERGY = 0.75 * PI2
CIRCLE_CURVE_ENERGY = 0.5 * PI2
# contour grid cap; points closer than ~1e-6 diam to K are flagged and degrade
MAX_CONTOUR_N = 1 << 22


class NearBoundaryWarning(ReliabilityWarning):
    pass


def _boundary_list(K) -> list[ClosedCurve]:
    if isinstance(K, PlanarDomain):
        return K.boundaries
    if isinstance(K, ClosedCurve):
        return [K]
    return list(K)


# ---------------------------------------------------------------------------
# potential


def _contour_n(curve: ClosedCurve, dist: np.ndarray, minimum: int = 128) -> np.ndarray:
    # trapezoid error ~ exp(-2*pi*dist*N / (2*pi*max_speed)); aim for ~1e-16
    vmax = curve._cache.get("vmax")
    if vmax is None:
        vmax = float(np.linalg.norm(curve.sample(curve.default_n(512), 1), axis=1).max())
        curve._cache["vmax"] = vmax
    need = 6.0 * TWO_PI * vmax / np.maximum(dist, 1e-300)
    need = np.clip(need, max(minimum, 4 * curve.modes), MAX_CONTOUR_N)
    return (2 ** np.ceil(np.log2(need))).astype(np.int64)


def _coarse_distance(curve: ClosedCurve, w: np.ndarray) -> np.ndarray:
    """Lower bound for the distance from each ``w`` to ``curve``."""
    n = curve.default_n(256)
    pts = curve.sample(n)
    out = np.empty(w.shape[0])
    for i in range(0, w.shape[0], 4096):
        d2 = ((w[i : i + 4096, None, :] - pts[None, :, :]) ** 2).sum(-1)
        out[i : i + 4096] = np.sqrt(d2.min(axis=1))
    # nearest vertex overshoots by at most half a node spacing
    slack = 0.5 * TWO_PI / n * float(np.linalg.norm(curve.sample(n, 1), axis=1).max())
    out -= slack
    near = out < 2.0 * slack
    if np.any(near):
        out[near] = closest_point(curve, w[near])[1]
    return out


def curve_potential(curve: ClosedCurve, w, dist=None) -> np.ndarray:
    """Contribution ``-1/2 \\oint det(p - w, dp) / |p - w|^4`` of one boundary curve."""
    w = np.atleast_2d(np.asarray(w, float))
    dist = _coarse_distance(curve, w) if dist is None else np.asarray(dist, float)
    ns = _contour_n(curve, 0.7 * dist)
    out = np.empty(w.shape[0])
    for n in np.unique(ns):
        idx = np.nonzero(ns == n)[0]
        P = curve.sample(int(n))
        D = curve.sample(int(n), 1)
        chunk = max(1, 4_000_000 // int(n))
        for i in range(0, idx.size, chunk):
            sel = idx[i : i + chunk]
            rel = P[None, :, :] - w[sel, None, :]
            r2 = (rel * rel).sum(-1)
            det = rel[..., 0] * D[None, :, 1] - rel[..., 1] * D[None, :, 0]
            out[sel] = -0.5 * (det / (r2 * r2)).sum(1) * (TWO_PI / n)
    return out


def potential(w, domain: PlanarDomain, *, check: bool = True) -> np.ndarray | float:
    """Renormalized potential ``V(w, Omega) = -\\int_{Omega^c} da / |z - w|^4``.

    Evaluated as the boundary contour integral with a grid refined according
    to the distance from ``w`` to each boundary curve.

    Parameters
    ----------
    w : array_like, shape (2,) or (n, 2)
        Interior points.
    domain : PlanarDomain
    """
    w_arr = np.atleast_2d(np.asarray(w, float))
    if check:
        inside = domain.contains(w_arr)
        if not np.all(inside):
            raise GeometryError("potential requested at a point outside the domain")
        dmin = domain.distance_to_boundary(w_arr)
        if np.any(dmin < 1e-6 * domain.diameter):
            warnings.warn("point within tolerance of the boundary; accuracy degraded", NearBoundaryWarning)
    V = sum(curve_potential(c, w_arr) for c in domain.boundaries)
    return float(V[0]) if np.ndim(w) == 1 else V


def potential_cutoff(w, domain: PlanarDomain, eps: float, *, n_phi: int = 2048) -> float:
    """Cutoff form ``\\int_{Omega \\ B_eps(w)} da/|z-w|^4 - pi/eps^2`` by polar ray casting.

    Each ray from ``w`` is intersected with every boundary curve; the radial
    integral over the inside intervals is exact, the angular one a periodic
    trapezoid sum.  Serves as an independent check of ``potential``.
    """
    w = np.asarray(w, float)
    phi = uniform_grid(n_phi)
    e = np.stack([np.cos(phi), np.sin(phi)], axis=1)
    hits: list[list[float]] = [[] for _ in range(n_phi)]
    for c in domain.boundaries:
        ng = max(1024, 32 * c.modes)
        tg = uniform_grid(ng)
        P = c.sample(ng) - w
        # sign of det(e, K(t) - w) along t for every ray direction
        vals = e[:, None, 0] * P[None, :, 1] - e[:, None, 1] * P[None, :, 0]
        rows, lo, hi = sign_change_brackets(vals, tg)
        er = e[rows]

        def f(t, er=er):
            Q = c.evaluate(t) - w
            return er[:, 0] * Q[:, 1] - er[:, 1] * Q[:, 0]

        def df(t, er=er):
            D = c.evaluate(t, 1)
            return er[:, 0] * D[:, 1] - er[:, 1] * D[:, 0]

        t = bracketed_newton(f, df, lo, hi)
        rad = ((c.evaluate(t) - w) * er).sum(-1)
        for i, r in zip(rows, rad):
            if r > 0:
                hits[i].append(r)
    total = 0.0
    for i in range(n_phi):
        rs = sorted(hits[i])
        # inside on [0, r1], then alternating
        acc, inside, prev = 0.0, True, 0.0
        for r in rs:
            if inside:
                a = max(prev, eps)
                if r > a:
                    acc += 0.5 * (1.0 / a**2 - 1.0 / r**2)
            inside = not inside
            prev = r
        total += acc
    return total * TWO_PI / n_phi - np.pi / eps**2


@dataclass
class PotentialProfile:
    deltas: np.ndarray
    values: np.ndarray
    c2: float
    c1: float
    c0: float
    curvature: float
    fit_residual: float


def potential_asymptotics(
    domain: PlanarDomain,
    boundary: int = 0,
    t: float = 0.0,
    *,
    largest: float | None = None,
    rungs: int = 8,
) -> PotentialProfile:
    """Sample V along the inward normal at ``K_boundary(t)`` and fit ``c2/d^2 + c1/d + c0 + c_{-1} d``."""
    c = domain.boundaries[boundary]
    fr = eval_frame(c, np.array([t]))
    kappa = float(fr.curvature[0])
    bound = domain.offset_bound()
    largest = largest or 0.05 * min(bound, domain.diameter)
    deltas = geometric_ladder(largest, rungs)
    pts = fr.point[0] + deltas[:, None] * fr.normal[0]
    if not np.all(domain.contains(pts)):
        raise GeometryError("normal ladder leaves the domain")
    vals = potential(pts, domain)
    coefs = fit_coefficients(deltas, vals, [-2, -1, 0, 1])
    model = sum(coefs[e] * deltas**e for e in coefs)
    resid = float(np.max(np.abs(model - vals) / np.abs(vals)))
    return PotentialProfile(deltas, vals, coefs[-2], coefs[-1], coefs[0], kappa, resid)


# ---------------------------------------------------------------------------
# E(Omega) from the area integral of V


def _smoothstep(x):
    x = np.clip(x, 0.0, 1.0)
    with np.errstate(divide="ignore", over="ignore"):
        f = np.where(x > 0, np.exp(-1.0 / np.where(x > 0, x, 1.0)), 0.0)
        g = np.where(x < 1, np.exp(-1.0 / np.where(x < 1, 1.0 - x, 1.0)), 0.0)
    return f / (f + g)


@dataclass
class DomainEnergyParts:
    collar_width: float
    transition_start: float
    interior: float
    outer_collar: float
    ladder_raw: list = field(default_factory=list)


def _near_levels(c: ClosedCurve, d_min: float) -> int:
    vmax = float(np.linalg.norm(c.sample(c.default_n(512), 1), axis=1).max())
    # smallest panel (in units of the period) no wider than d_min / (2 pi vmax)
    return int(np.clip(np.ceil(np.log2(TWO_PI * vmax / d_min)), 3, 50))


def own_potential_near(c: ClosedCurve, s: np.ndarray, d: np.ndarray, *, n_gl: int = 16) -> np.ndarray:
    """Potential of the boundary ``c`` alone at ``K(s) + d nu(s)``, shape ``(len(s), len(d))``.

    The contour integrand peaks at ``t = s`` with width ``d / |K'|``; panels
    graded toward ``t = s`` keep the cost independent of ``d``.
    """
    fr = eval_frame(c, s)
    levels = _near_levels(c, float(np.min(d)))
    f, w = graded_rule(levels, n_gl, min(0.5, 1.0 / (2 * max(c.modes, 4))))
    out = np.empty((s.size, d.size))
    chunk = max(1, 200_000 // f.size)
    for i in range(0, s.size, chunk):
        sl = slice(i, i + chunk)
        T = s[sl, None] + TWO_PI * f[None, :]
        Q = c.evaluate(T)
        D = c.evaluate(T, 1)
        for k, dk in enumerate(d):
            W = fr.point[sl] + dk * fr.normal[sl]
            rx = Q[..., 0] - W[:, None, 0]
            ry = Q[..., 1] - W[:, None, 1]
            r2 = rx * rx + ry * ry
            det = rx * D[..., 1] - ry * D[..., 0]
            out[sl, k] = -0.5 * (det / (r2 * r2)) @ (TWO_PI * w)
    return out


def _collar_integral(domain: PlanarDomain, n_s: int, d_nodes, d_weights, chi=None) -> float:
    # sum over boundaries of \int ds \int dd  chi(d) V(K + d nu) |K'| (1 - kappa d)
    total = 0.0
    s = uniform_grid(n_s)
    wts = d_weights if chi is None else d_weights * chi
    for c in domain.boundaries:
        fr = eval_frame(c, s)
        V = own_potential_near(c, s, d_nodes)
        others = [c2 for c2 in domain.boundaries if c2 is not c]
        if others:
            W = fr.point[:, None, :] + d_nodes[None, :, None] * fr.normal[:, None, :]
            flat = W.reshape(-1, 2)
            V += sum(curve_potential(c2, flat) for c2 in others).reshape(V.shape)
        J = fr.speed[:, None] * (1.0 - fr.curvature[:, None] * d_nodes[None, :])
        total += float(((V * J) @ wts).sum()) * TWO_PI / n_s
    return total


def domain_energy(
    domain: PlanarDomain,
    *,
    rungs: int = 7,
    largest: float | None = None,
    n_s: int | None = None,
    points_per_transition: int = 20,
    diagnostic: bool = False,
) -> RenormResult:
    """Renormalized energy ``E(Omega) = lim (\\int_{Omega_delta} V + pi L / (4 delta))``.

    The area integral is split by a smooth partition of unity: a boundary
    collar in normal-offset coordinates (graded in log-distance where
    ``V ~ delta^-2``) and an interior part on a uniform grid, where the
    integrand is smooth and compactly supported so the grid sum converges
    fast.  Only the innermost collar panel depends on delta.

    Returns
    -------
    RenormResult
        Extrapolated with model ``{1, delta, delta^2, delta^3}``.  With
        ``diagnostic=True`` the raw integrals are fitted instead, with the
        ``1/delta`` coefficient left free.
    """
    bound = domain.offset_bound()
    b = 0.8 * bound
    a = 0.5 * b
    if largest is None:
        kabs = max(float(np.max(np.abs(c.curvature(uniform_grid(c.default_n(512)))))) for c in domain.boundaries)
        largest = min(domain.diameter / 16.0, a, 0.125 / kabs)
    if largest > a:
        raise OffsetError(f"ladder start {largest:.4g} exceeds feasible collar offset {a:.4g}", a)
    deltas = geometric_ladder(largest, rungs)
    L = domain.length
    n_s = n_s or max(256, *(c.default_n(256) for c in domain.boundaries))

    # transition panel [a, b]
    x, w = gauss_legendre(48)
    d_out = a + 0.5 * (b - a) * (x + 1)
    w_out = 0.5 * (b - a) * w
    chi_out = 1.0 - _smoothstep((d_out - a) / (b - a))
    outer_part = _collar_integral(domain, n_s, d_out, w_out, chi_out)

    # interior grid: (1 - chi(dist)) V, smooth with support in Omega_a
    h = (b - a) / points_per_transition
    lo, hi = domain.bounding_box()
    xs = np.arange(lo[0] + 0.5 * h, hi[0], h)
    ys = np.arange(lo[1] + 0.5 * h, hi[1], h)
    G = np.stack(np.meshgrid(xs, ys, indexing="ij"), axis=-1).reshape(-1, 2)
    sd = domain.signed_distance(G)
    G, dist = G[sd > a], sd[sd > a]
    weight = _smoothstep((dist - a) / (b - a))
    keep = weight > 0
    G, weight = G[keep], weight[keep]
    V = sum(curve_potential(c, G) for c in domain.boundaries)
    interior = float((weight * V).sum() * h * h)

    xg, wg = gauss_legendre(32)
    raw = []
    for delta in deltas:
        lv0, lv1 = np.log(delta), np.log(a)
        v = lv0 + 0.5 * (lv1 - lv0) * (xg + 1)
        d_in = np.exp(v)
        w_in = 0.5 * (lv1 - lv0) * wg * d_in
        inner = _collar_integral(domain, n_s, d_in, w_in)
        raw.append(inner + outer_part + interior)
    raw = np.array(raw)
    if diagnostic:
        res = extrapolate(zip(deltas, raw), DivergenceModel((-1, 0, 1, 2, 3)))
    else:
        res = extrapolate(zip(deltas, raw + np.pi * L / (4 * deltas)), DivergenceModel((0, 1, 2, 3)))
    res.parts = DomainEnergyParts(b, a, interior, outer_part, list(zip(deltas, raw)))
    return res


# ---------------------------------------------------------------------------
# E(K) and cutoff forms


def _check_disjoint(curves):
    diam = max(c.diameter for c in curves)
    for i, a in enumerate(curves):
        for b in curves[i + 1 :]:
            # a crossing shows up as a jump of the winding number along the other curve
            wn = winding_number(b, a.sample(a.default_n(512)))
            if np.any(wn != wn[0]) or _curve_distance(a, b) < 1e-9 * diam:
                raise GeometryError("curve components intersect")


def curve_energy(K, n: int | None = None) -> float:
    """Limit-free ``E(K) = -1/2 \\iint sin(theta_p) sin(theta_q) dp dq / |q-p|^2``.

    ``K`` may be a curve, a list of planar curves or a ``PlanarDomain``;
    all ordered pairs of components are integrated.  Self-pair diagonals
    take the limit value ``-kappa^2 / 4``.
    """
    curves = _boundary_list(K)
    if any(c.dimension != 2 for c in curves):
        raise GeometryError("planar curve_energy needs planar curves")
    if not isinstance(K, PlanarDomain):
        _check_disjoint(curves)
    total = 0.0
    for i, Ki in enumerate(curves):
        ni = n or Ki.default_n(256)
        for j, Kj in enumerate(curves):
            if i == j:
                kap = eval_frame(Ki, uniform_grid(ni)).curvature
                total += torus_sum(Ki, Ki, sinsin_density, ni, diagonal=-0.25 * kap**2)
            else:
                nj = n or Kj.default_n(256)
                total += torus_sum(Ki, Kj, sinsin_density, ni, nj)
    return -0.5 * total


@dataclass
class CutoffEnergy:
    form: str
    curve: RenormResult  # E(K) convention
    kappa_term: float  # (pi/8) \oint kappa

    @property
    def value(self) -> float:
        return self.curve.value

    @property
    def domain_value(self) -> float:
        return self.curve.value + self.kappa_term


_FORMS = {
    # (density, integral prefactor, counterterm coefficient of L/eps)
    "dots": (dots_density, -0.25, 0.5),
    "coscos": (coscos_density, -0.5, 1.0),
}


def cutoff_ladder(curves, form: str, deltas, n: int | None = None) -> np.ndarray:
    dens, pref, _ = _FORMS[form]
    return np.array([pref * system_cutoff_integral(curves, dens, float(e), n) for e in deltas])


def curve_energy_cutoff(
    K,
    form: str = "dots",
    *,
    rungs: int = 6,
    largest: float | None = None,
    n: int | None = None,
    diagnostic: bool = False,
):
    """Cutoff energy ``lim (c L/eps + pref \\iint_{|q-p|>eps} density)``.

    ``form='dots'``: ``L/(2 eps) - 1/4 \\iint dp.dq/r^2``;
    ``form='coscos'``: ``L/eps - 1/2 \\iint cos cos/r^2``.
    Both limits equal E(K); adding ``(pi/8) \\oint kappa`` gives E(Omega)
    with the orientation induced by the domain.

    With ``diagnostic=True`` returns the fitted coefficient dict of the raw
    cutoff integrals (the ``-1`` entry is minus the counterterm coefficient).
    """
    if form not in _FORMS:
        raise ValueError(f"unknown form {form!r}")
    curves = _boundary_list(K)
    L = sum(c.length for c in curves)
    diam = max(c.diameter for c in curves) if len(curves) == 1 else max(c.diameter for c in curves)
    largest = largest or diam / 16.0
    deltas = geometric_ladder(largest, rungs)
    raw = cutoff_ladder(curves, form, deltas, n)
    if diagnostic:
        return fit_coefficients(deltas, raw, [-1, 0, 1, 2, 3])
    ct = _FORMS[form][2]
    res = extrapolate(zip(deltas, raw + ct * L / deltas), DivergenceModel((0, 1, 2, 3)))
    kterm = np.pi / 8.0 * sum(c.total_curvature() for c in curves)
    return CutoffEnergy(form, res, kterm)


# ---------------------------------------------------------------------------
# mutual energies


def _star_parametrization(domain: PlanarDomain, n_r: int, n_t: int):
    if not domain.is_simply_connected:
        raise GeometryError("area quadrature needs simply connected domains")
    c = domain.outer
    ctr = c.a0
    t = uniform_grid(n_t)
    P = c.evaluate(t) - ctr
    D = c.evaluate(t, 1)
    jac = P[:, 0] * D[:, 1] - P[:, 1] * D[:, 0]
    if np.any(jac <= 0):
        raise GeometryError("domain is not star-shaped about its centroid")
    x, w = gauss_legendre(n_r)
    rho = 0.5 * (x + 1)
    wr = 0.5 * w
    pts = ctr + rho[:, None, None] * P[None, :, :]
    wts = (wr * rho)[:, None] * jac[None, :] * (TWO_PI / n_t)
    return pts.reshape(-1, 2), wts.reshape(-1)


def mutual_energy_area(O1: PlanarDomain, O2: PlanarDomain, *, n_r: int = 32, n_t: int = 128) -> float:
    """``E(Omega_1, Omega_2) = \\iint da_w da_z / |z - w|^4`` by 4D tensor quadrature.

    Each domain (star-shaped about its centroid) is parametrized by
    ``c + rho (K(t) - c)``: Gauss-Legendre in ``rho``, trapezoid in ``t``.
    """
    P1, W1 = _star_parametrization(O1, n_r, n_t)
    P2, W2 = _star_parametrization(O2, n_r, n_t)
    if np.any(O2.contains(P1[:: max(1, P1.shape[0] // 2000)])):
        raise GeometryError("domains overlap")
    total = 0.0
    for i in range(0, P1.shape[0], 1024):
        d = P1[i : i + 1024, None, :] - P2[None, :, :]
        r2 = (d * d).sum(-1)
        total += float(W1[i : i + 1024] @ (1.0 / (r2 * r2)) @ W2)
    return total


def mutual_energy_contour(K1, K2, form: str = "dots", n: int | None = None) -> float:
    """Contour forms of the planar mutual energy.

    ``rere``: ``-1/2 \\iint cos(theta_1) cos(theta_2) dp_1 dp_2 / r^2``;
    ``imim``: same with sines; ``dots``: ``-1/4 \\iint dp_1 . dp_2 / r^2``.
    Arguments may be curves or domains (then their boundaries are used).
    """
    c1, c2 = _boundary_list(K1), _boundary_list(K2)
    dens, pref = {
        "rere": (coscos_density, -0.5),
        "imim": (sinsin_density, -0.5),
        "dots": (dots_density, -0.25),
    }[form]
    total = 0.0
    for a in c1:
        for b in c2:
            na = n or max(a.default_n(256), b.default_n(256))
            total += torus_sum(a, b, dens, na, na)
    return pref * total


# ---------------------------------------------------------------------------
# line geometry


def _monotone_roots(curve: ClosedCurve, u: np.ndarray, r: np.ndarray, lo, hi):
    """Roots of ``K(t).u = r`` on arcs ``[lo, hi]`` where ``K.u`` is monotone."""

    def f(t):
        return curve.evaluate(t) @ u - r

    def df(t):
        return curve.evaluate(t, 1) @ u

    return bracketed_newton(f, df, lo, hi)


def _critical_points(curve: ClosedCurve, u: np.ndarray):
    """Parameters where ``K'(t) . u = 0`` (tangent perpendicular to ``u``)."""
    ng = max(256, 32 * curve.modes)
    tg = uniform_grid(ng)
    vals = curve.sample(ng, 1) @ u
    _, lo, hi = sign_change_brackets(vals[None, :], tg)
    t = bracketed_newton(lambda t: curve.evaluate(t, 1) @ u, lambda t: curve.evaluate(t, 2) @ u, lo, hi)
    return np.sort(t % TWO_PI)


def convex_chord_energy(domain: PlanarDomain, *, n_theta: int = 256, n_r: int = 64) -> float:
    """``E(K) = \\int dl / L(l \\cap Omega)`` over lines meeting a convex domain.

    Lines are ``x . u(theta) = r`` with ``theta in [0, pi)``; in ``r`` the
    substitution ``r = m + h sin(phi)`` absorbs the inverse square-root
    endpoint behaviour of ``1/L``.
    """
    if not domain.is_simply_connected:
        raise GeometryError("convex chord formula needs a convex domain")
    c = domain.outer
    kap = eval_frame(c, uniform_grid(c.default_n(1024))).curvature
    if np.any(kap <= 0):
        raise GeometryError("domain is not convex")
    x, w = gauss_legendre(n_r)
    phi = 0.5 * np.pi * x
    wphi = 0.5 * np.pi * w
    total = 0.0
    for th in np.pi * np.arange(n_theta) / n_theta:
        u = np.array([np.cos(th), np.sin(th)])
        tc = _critical_points(c, u)
        if tc.size != 2:
            raise GeometryError("support function has more than two critical points")
        hv = c.evaluate(tc) @ u
        tmin, tmax = (tc[0], tc[1]) if hv[0] < hv[1] else (tc[1], tc[0])
        hmin, hmax = min(hv), max(hv)
        m, h = 0.5 * (hmax + hmin), 0.5 * (hmax - hmin)
        r = m + h * np.sin(phi)
        up_lo, up_hi = tmin, tmax if tmax > tmin else tmax + TWO_PI
        dn_lo, dn_hi = tmax, tmin if tmin > tmax else tmin + TWO_PI
        t1 = _monotone_roots(c, u, r, np.full_like(r, up_lo), np.full_like(r, up_hi))
        t2 = _monotone_roots(c, u, r, np.full_like(r, dn_lo), np.full_like(r, dn_hi))
        chord = np.linalg.norm(c.evaluate(t1) - c.evaluate(t2), axis=-1)
        total += float(np.sum(wphi * h * np.cos(phi) / chord))
    return total * np.pi / n_theta


@dataclass
class _Arc:
    curve: ClosedCurve
    lo: float
    hi: float
    h_lo: float
    h_hi: float


def line_crossings(curves, theta: float, r: np.ndarray):
    """Crossings of the lines ``x . u(theta) = r`` with a curve system.

    Returns ``(pos, sign)`` arrays of shape ``(len(r), n_arcs)``: position
    along the line direction ``(-sin, cos)`` and crossing sign, NaN/0 where
    an arc is not crossed.
    """
    u = np.array([np.cos(theta), np.sin(theta)])
    v = np.array([-u[1], u[0]])
    arcs = _monotone_arcs(curves, u)
    pos = np.full((r.size, len(arcs)), np.nan)
    sgn = np.zeros((r.size, len(arcs)))
    for j, arc in enumerate(arcs):
        a, b = sorted((arc.h_lo, arc.h_hi))
        m = (r > a) & (r < b)
        if not np.any(m):
            continue
        rr = r[m]
        t = _monotone_roots(arc.curve, u, rr, np.full(rr.size, arc.lo), np.full(rr.size, arc.hi))
        pos[m, j] = arc.curve.evaluate(t) @ v
        sgn[m, j] = np.sign(arc.h_hi - arc.h_lo)
    return pos, sgn, arcs


def _monotone_arcs(curves, u) -> list[_Arc]:
    arcs = []
    for c in curves:
        tc = _critical_points(c, u)
        if tc.size < 2:
            raise GeometryError("closed curve must have at least two critical points")
        hv = c.evaluate(tc) @ u
        for i in range(tc.size):
            lo = tc[i]
            hi = tc[(i + 1) % tc.size] + (TWO_PI if i + 1 == tc.size else 0.0)
            arcs.append(_Arc(c, lo, hi, hv[i], hv[(i + 1) % tc.size]))
    return arcs


def segment_pair_sum(pos: np.ndarray, sgn: np.ndarray) -> np.ndarray:
    """``sum_{p != q} eps(p) eps(q) / |q - p|`` over the crossings of each line."""
    out = np.zeros(pos.shape[0])
    n = pos.shape[1]
    for i in range(n):
        for j in range(i + 1, n):
            d = np.abs(pos[:, i] - pos[:, j])
            ok = np.isfinite(d)
            out[ok] += 2.0 * sgn[ok, i] * sgn[ok, j] / d[ok]
    return out


def segment_energy(K, *, n_theta: int = 512, n_r: int = 32) -> float:
    """``E(K) = -1/2 \\int_{A(1,2)} sum_{p != q} eps(p) eps(q) / |q - p| dl``.

    For each direction the ``r``-range is cut at the critical values (lines
    tangent to K); on each piece ``r = m + h sin(phi)`` with Gauss-Legendre
    nodes in ``phi`` absorbs the square-root behaviour at tangencies.
    """
    curves = _boundary_list(K)
    x, w = gauss_legendre(n_r)
    phi = 0.5 * np.pi * x
    wphi = 0.5 * np.pi * w
    total = 0.0
    for th in np.pi * np.arange(n_theta) / n_theta:
        u = np.array([np.cos(th), np.sin(th)])
        crit = np.unique(
            np.round(np.concatenate([c.evaluate(_critical_points(c, u)) @ u for c in curves]), 14)
        )
        for a, b in zip(crit[:-1], crit[1:]):
            m, h = 0.5 * (a + b), 0.5 * (b - a)
            r = m + h * np.sin(phi)
            pos, sgn, _ = line_crossings(curves, th, r)
            S = segment_pair_sum(pos, sgn)
            total += float(np.sum(wphi * h * np.cos(phi) * S))
    return -0.5 * total * np.pi / n_theta


# ---------------------------------------------------------------------------
# NT(Omega) route


@dataclass
class NTEstimate:
    value: float
    stderr: float
    integral: float
    n_samples: int
    nt_fraction: float
    discard_rate: float


def nt_energy(
    domain: PlanarDomain,
    n_samples: int = 200_000,
    seed: int = 0,
    *,
    n_boundary: int = 2048,
    batch: int = 8192,
) -> NTEstimate:
    """``E(K) = pi^2 chi / 2 + \\int_{NT} da_w da_z / |z - w|^4`` by Monte Carlo.

    Pairs ``(w, z)`` are drawn uniformly from ``Omega x Omega``.  A pair is
    outside NT when some circle through ``w`` and ``z`` bounds a disk inside
    ``Omega``, i.e. has every boundary point strictly outside it.  For
    simply connected domains this is the same as the circle missing the
    boundary; with holes, circles around a hole miss the boundary without
    separating the pair from the complement, and must not count.  All
    boundary samples are therefore passed to the classifier as a single
    component, leaving "all outside" as the only admissible configuration.
    circles through both points are ``c = m + sigma n_perp`` and for each
    boundary sample ``|p - c|^2 - R^2`` is affine in ``sigma``, so the set of
    admissible ``sigma`` is an intersection of intervals computed exactly.
    """
    from .integral_geometry import batch_generator

    lo, hi = domain.bounding_box()
    box_area = float(np.prod(hi - lo))
    B = np.ascontiguousarray(np.concatenate([c.sample(n_boundary) for c in domain.boundaries]))
    cid = np.zeros(B.shape[0], dtype=np.int64)
    n_batches = max(1, -(-n_samples // batch))
    means = []
    n_nt = n_disc = n_tot = 0
    for bi in range(n_batches):
        rng = batch_generator(seed, bi)
        m = min(batch, n_samples - bi * batch)
        W = lo + (hi - lo) * rng.random((m, 2))
        Z = lo + (hi - lo) * rng.random((m, 2))
        ok = domain.contains(W) & domain.contains(Z)
        status = np.zeros(m, dtype=np.int64)
        if ok.any():
            status[ok] = kernels.nt_status(B, cid, 1, W[ok], Z[ok])
        val = np.zeros(m)
        nt = ok & (status == 1)
        r2 = ((Z[nt] - W[nt]) ** 2).sum(-1)
        val[nt] = box_area**2 / (r2 * r2)
        good = status != 2
        means.append(val[good].mean())
        n_nt += int(nt.sum())
        n_disc += int((status == 2).sum())
        n_tot += m
    means = np.array(means)
    integral = float(means.mean())
    se = float(means.std(ddof=1) / np.sqrt(len(means))) if len(means) > 1 else float("nan")
    chi = domain.euler_characteristic
    return NTEstimate(0.5 * PI2 * chi + integral, se, integral, n_tot, n_nt / n_tot, n_disc / n_tot)


# ---------------------------------------------------------------------------
# tangent-circle angle forms


def _unit(z):
    return z / np.abs(z)


def _complex_frames(c: ClosedCurve, n: int):
    P = c.sample(n)
    D = c.sample(n, 1)
    z = P[:, 0] + 1j * P[:, 1]
    dz = D[:, 0] + 1j * D[:, 1]
    return z, dz


def tangent_circle_theta(c: ClosedCurve, n: int) -> np.ndarray:
    """Unwrapped angle ``theta(p, q)`` on the ``n x n`` grid, zero on the diagonal.

    ``theta`` is the angle at ``p`` from the tangent of K to the circle
    through ``p`` that is tangent to K at ``q``; that circle's tangent at
    ``p`` is ``e^2 conj(T_q)`` with ``e`` the unit chord direction.
    """
    z, dz = _complex_frames(c, n)
    T = _unit(dz)
    idx = (np.arange(n)[:, None] + np.arange(n)[None, :]) % n  # row i: q = i, i+1, ...
    d = z[idx] - z[:, None]
    with np.errstate(invalid="ignore", divide="ignore"):
        e = _unit(d)
        val = e * e * np.conj(T[idx]) * np.conj(T[:, None])
    ang = np.angle(val)
    ang[:, 0] = 0.0
    steps = np.diff(ang, axis=1)
    wrapped = (steps + np.pi) % TWO_PI - np.pi
    if np.any(np.abs(wrapped) > 0.5 * np.pi):
        raise GeometryError("theta unwrapping jump above pi/2: increase the resolution")
    th = np.concatenate([np.zeros((n, 1)), np.cumsum(wrapped, axis=1)], axis=1)
    closing = (0.0 - ang[:, -1] + np.pi) % TWO_PI - np.pi
    if np.any(np.abs(th[:, -1] + closing) > 1e-6):
        raise GeometryError("theta has no continuous determination vanishing on the diagonal")
    out = np.empty((n, n))
    rows = np.arange(n)[:, None]
    out[rows, idx] = th
    return out


@dataclass
class TangentCircleEnergy:
    integral: float
    constant: float
    constant_printed: float

    @property
    def value(self) -> float:
        return self.constant + self.integral

    @property
    def value_printed_constant(self) -> float:
        return self.constant_printed + self.integral


def tangent_circle_energy(domain: PlanarDomain, n: int | None = None) -> TangentCircleEnergy:
    """``E(Omega) = C + 1/4 \\iint theta sin(theta) dp dq / |q - p|^2``.

    The constant is calibrated on the disk (where ``theta = 0``) to
    ``3 pi^2 / 4``; the alternative value ``pi^2 / 2`` is reported alongside.
    """
    if not domain.is_simply_connected:
        raise GeometryError("tangent-circle form needs a simply connected domain")
    c = domain.outer
    n = n or c.default_n(256)
    th = tangent_circle_theta(c, n)
    z, dz = _complex_frames(c, n)
    sp = np.abs(dz)
    r2 = np.abs(z[:, None] - z[None, :]) ** 2
    np.fill_diagonal(r2, 1.0)
    F = th * np.sin(th) / r2
    np.fill_diagonal(F, 0.0)
    integral = 0.25 * float(sp @ F @ sp) * (TWO_PI / n) ** 2
    return TangentCircleEnergy(integral, DISK_DOMAIN_ENERGY, 0.5 * PI2)


def pair_theta(c1: ClosedCurve, c2: ClosedCurve, n: int):
    """Angle between the circles through ``p1(s), p2(t)`` tangent to K1 at p1 and to K2 at p2.

    Returns the wrapped angle grid (rows s, columns t).
    """
    z1, d1 = _complex_frames(c1, n)
    z2, d2 = _complex_frames(c2, n)
    e = _unit(z2[None, :] - z1[:, None])
    return np.angle(e * e * np.conj(_unit(d1))[:, None] * np.conj(_unit(d2))[None, :])


def pair_theta_derivatives_exact(c1: ClosedCurve, c2: ClosedCurve, n: int):
    """Closed-form ``d theta/ds`` and ``d theta/dt`` (cross-check for the spectral route)."""
    z1, d1 = _complex_frames(c1, n)
    z2, d2 = _complex_frames(c2, n)
    t = uniform_grid(n)
    k1 = c1.curvature(t) * np.abs(d1)
    k2 = c2.curvature(t) * np.abs(d2)
    w = z2[None, :] - z1[:, None]
    th_s = 2.0 * np.imag(-d1[:, None] / w) - k1[:, None]
    th_t = 2.0 * np.imag(d2[None, :] / w) - k2[None, :]
    return th_s, th_t


def _spectral_derivative(f, axis):
    n = f.shape[axis]
    k = np.fft.fftfreq(n, d=1.0 / n)
    k[n // 2] = 0.0 if n % 2 == 0 else k[n // 2]
    shape = [1, 1]
    shape[axis] = n
    F = np.fft.fft(f, axis=axis)
    return np.real(np.fft.ifft(1j * k.reshape(shape) * F, axis=axis))


@dataclass
class PairThetaEnergy:
    """Tangent-circle pair form of the mutual energy.

    ``integral`` is ``\\iint d_s theta d_t theta ds dt``.  ``printed_form``
    is ``pi^2/2 - integral/8``; with theta the oriented angle between the
    two positively tangent circles this equals ``-E(Omega_1, Omega_2)``,
    so ``value`` is its negative, ``integral/8 - pi^2/2``.
    """

    integral: float
    winding_s: int
    winding_t: int

    @property
    def printed_form(self) -> float:
        return 0.5 * PI2 - 0.125 * self.integral

    @property
    def value(self) -> float:
        return -self.printed_form


def pair_theta_energy(O1, O2, n: int | None = None, *, exact_derivatives: bool = False) -> PairThetaEnergy:
    """Mutual energy from the angle between tangent circles of two boundaries.

    ``theta(s, t)`` is unwrapped on the grid starting from the basepoint
    ``(s, t) = (0, 0)``; its linear winding in each variable is removed, the
    periodic remainder is differentiated spectrally and the winding added
    back.  ``exact_derivatives=True`` uses the closed-form derivatives
    instead (cross-check).
    """
    c1 = O1.outer if isinstance(O1, PlanarDomain) else O1
    c2 = O2.outer if isinstance(O2, PlanarDomain) else O2
    n = n or max(c1.default_n(256), c2.default_n(256))
    th = pair_theta(c1, c2, n)
    th = np.unwrap(th, axis=1)
    th = th - th[:, :1] + np.unwrap(th[:, 0])[:, None]
    t = uniform_grid(n)

    def turns(a, b):
        # total change of a continuous angle over one loop, from its endpoints
        return int(np.rint((b - a + ((a - b + np.pi) % TWO_PI - np.pi)) / TWO_PI))

    wt = turns(th[0, 0], th[0, -1])
    ws = turns(th[0, 0], th[-1, 0])
    per = th - wt * t[None, :] - ws * t[:, None]
    # the remainder must now be periodic in both variables
    gap_t = np.abs((per[:, 0] - per[:, -1]) - (per[:, 1] - per[:, 0]))
    gap_s = np.abs((per[0, :] - per[-1, :]) - (per[1, :] - per[0, :]))
    if max(gap_t.max(), gap_s.max()) > 0.5 * np.pi:
        raise GeometryError("theta unwrapping failed: increase the resolution")
    if exact_derivatives:
        th_s, th_t = pair_theta_derivatives_exact(c1, c2, n)
    else:
        th_s = _spectral_derivative(per, 0) + ws
        th_t = _spectral_derivative(per, 1) + wt
    integral = float(np.sum(th_s * th_t)) * (TWO_PI / n) ** 2
    return PairThetaEnergy(integral, ws, wt)


def random_star_domain(rng: np.random.Generator, n_modes: int = 4, amplitude: float = 0.25) -> PlanarDomain:
    """Smooth star-shaped domain with random radial Fourier perturbation."""
    k = np.arange(2, 2 + n_modes)
    amp = amplitude * rng.standard_normal((n_modes, 2)) / k[:, None] ** 1.5
    terms = [(int(kk), float(a), float(b)) for kk, (a, b) in zip(k, amp)]
    radial_min = 1.0 - np.abs(amp).sum()
    if radial_min <= 0.2:
        amp *= 0.8 / np.abs(amp).sum()
        terms = [(int(kk), float(a), float(b)) for kk, (a, b) in zip(k, amp)]
    return PlanarDomain(ClosedCurve.star(terms))
