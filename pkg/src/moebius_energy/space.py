"""Energy, mutual energy and writhe of closed curves in space.

Routes for ``E(K)``:

* ``direct``   ``-1/2 \\iint cos(tau) sin(theta_p) sin(theta_q) dp dq / r^2`` (no limit)
* ``coscos``   ``lim L/eps - 1/2 \\iint_{r>eps} cos cos / r^2``
* ``dots``     ``lim L/(2 eps) - 1/4 \\iint_{r>eps} dp.dq / r^2``
* ``parallel`` ``lim (pi L/(4 delta) + E(K, K_delta)) - (pi/8) \\oint kappa``
* ``mc``       Monte Carlo over circles, see ``integral_geometry``
"""
from __future__ import annotations

import time
import warnings
from dataclasses import dataclass, field

import numpy as np

from .curves import (
    TWO_PI,
    ClosedCurve,
    GeometryError,
    ReliabilityWarning,
    eval_frame,
    parallel_curve3,
    uniform_grid,
)
from .quadrature import (
    coscos_density,
    dots_density,
    near_pair_integral,
    sinsin_density,
    torus_sum,
    writhe_density,
)
from .planar import _FORMS, cutoff_ladder
from .renorm import DivergenceModel, RenormResult, extrapolate, fit_coefficients, geometric_ladder


class NearContactWarning(ReliabilityWarning):
    pass


@dataclass
class EnergyReport:
    value: float
    route: str
    renorm: RenormResult | None = None
    n: int = 0
    diagnostics: dict = field(default_factory=dict)
    error: float = float("nan")
    runtime_ms: float = 0.0

    def to_dict(self) -> dict:
        out = {
            "route": self.route,
            "value": self.value,
            "err": self.error,
            "n": self.n,
            "runtime_ms": self.runtime_ms,
            "diagnostics": self.diagnostics,
        }
        if self.renorm is not None:
            out["renorm"] = self.renorm.to_dict()
        return out


def _as_space(curves) -> list[ClosedCurve]:
    if isinstance(curves, ClosedCurve):
        curves = [curves]
    return [c if c.dimension == 3 else c.embed3() for c in curves]


def check_embedded(curves, rel_tol: float = 1e-3) -> float:
    """Smallest gap between non-neighbouring arcs relative to the diameter; warns below ``rel_tol``."""
    curves = _as_space(curves)
    diam = max(c.diameter for c in curves)
    gap = min(c.min_self_distance() for c in curves)
    for i in range(len(curves)):
        for j in range(i + 1, len(curves)):
            a = curves[i].sample(curves[i].default_n(512))
            b = curves[j].sample(curves[j].default_n(512))
            gap = min(gap, float(np.sqrt(((a[:, None] - b[None]) ** 2).sum(-1)).min()))
    if gap < rel_tol * diam:
        warnings.warn(f"curve nearly self-intersects: minimal gap {gap:.3g}", NearContactWarning)
    return gap / diam


def _timed(fn):
    t0 = time.perf_counter()
    rep = fn()
    rep.runtime_ms = 1e3 * (time.perf_counter() - t0)
    return rep


# ---------------------------------------------------------------------------
# E(K)


def space_energy(K, n: int | None = None, *, check: bool = True) -> EnergyReport:
    """Limit-free ``E(K)``; ``K`` may be a curve or a list of disjoint curves.

    Self-pairs use the diagonal value ``-kappa^2/4``; distinct components
    are integrated without a diagonal.
    """

    def run():
        curves = _as_space(K)
        if check:
            check_embedded(curves)
        total = 0.0
        ns = []
        for i, Ki in enumerate(curves):
            ni = n or Ki.default_n(256)
            ns.append(ni)
            for j, Kj in enumerate(curves):
                if i == j:
                    kap = eval_frame(Ki, uniform_grid(ni)).curvature
                    total += torus_sum(Ki, Ki, sinsin_density, ni, diagonal=-0.25 * kap**2)
                else:
                    total += torus_sum(Ki, Kj, sinsin_density, ni, n or Kj.default_n(256))
        return EnergyReport(-0.5 * total, "direct", n=max(ns))

    return _timed(run)


def space_energy_cutoff(
    K,
    form: str = "coscos",
    *,
    rungs: int = 6,
    largest: float | None = None,
    n: int | None = None,
    diagnostic: bool = False,
) -> EnergyReport:
    """Cutoff forms ``coscos`` (counterterm ``L/eps``) and ``dots`` (``L/(2 eps)``).

    With ``diagnostic=True`` the raw integrals are fitted with a free
    ``1/eps`` term and its coefficient is reported in ``diagnostics``.
    """

    def run():
        curves = _as_space(K)
        L = sum(c.length for c in curves)
        lg = largest or max(c.diameter for c in curves) / 16.0
        eps = geometric_ladder(lg, rungs)
        raw = cutoff_ladder(curves, form, eps, n)
        ct = _FORMS[form][2]
        res = extrapolate(zip(eps, raw + ct * L / eps), DivergenceModel((0, 1, 2, 3)))
        diag = {"counterterm_expected": ct * L}
        if diagnostic:
            coefs = fit_coefficients(eps, raw, [-1, 0, 1, 2, 3])
            diag["counterterm_fitted"] = -coefs[-1]
            diag["coefficients"] = coefs
        return EnergyReport(res.value, form, res, n=n or 0, diagnostics=diag, error=res.error_estimate)

    return _timed(run)


def space_energy_parallel(
    K: ClosedCurve,
    *,
    rungs: int = 6,
    largest: float | None = None,
    diagnostic: bool = False,
) -> EnergyReport:
    """Parallel-curve renormalization along the principal normal.

    ``E(K) = lim (pi L / (4 delta) + E(K, K_delta)) - (pi/8) \\oint kappa``
    with ``E(K, K_delta) = -1/4 \\iint dp.dq / |q - p|^2``.
    """

    def run():
        c = _as_space(K)[0]
        kmax = float(np.max(c.curvature(uniform_grid(c.default_n(1024)))))
        lg = largest or min(c.diameter / 16.0, 0.25 / kmax)
        deltas = geometric_ladder(lg, rungs)
        L = c.length
        raw = []
        for d in deltas:
            Kd = parallel_curve3(c, float(d))
            raw.append(-0.25 * near_pair_integral(c, Kd, dots_density, float(d)))
        raw = np.array(raw)
        res = extrapolate(zip(deltas, raw + np.pi * L / (4 * deltas)), DivergenceModel((0, 1, 2, 3)))
        kterm = np.pi / 8.0 * c.total_curvature()
        diag = {"kappa_term": kterm, "counterterm_expected": np.pi * L / 4}
        if diagnostic:
            coefs = fit_coefficients(deltas, raw, [-1, 0, 1, 2, 3])
            diag["counterterm_fitted"] = -coefs[-1]
        return EnergyReport(res.value - kterm, "parallel", res, diagnostics=diag, error=res.error_estimate)

    return _timed(run)


# ---------------------------------------------------------------------------
# mutual energy


@dataclass
class MutualEnergy:
    value: float  # dots form
    coscos: float
    n: int

    @property
    def form_gap(self) -> float:
        return abs(self.value - self.coscos)


def mutual_energy_space(K1, K2, n: int | None = None, *, rtol: float = 1e-12, n_max: int = 1 << 14) -> MutualEnergy:
    """``E(K_1, K_2) = -1/4 \\iint dp.dq / r^2 = -1/2 \\iint cos cos dp dq / r^2``.

    The grid is doubled until the dots form stabilizes (spectral
    convergence for separated curves).
    """
    a, b = _as_space(K1)[0], _as_space(K2)[0]
    sa = a.sample(a.default_n(512))
    sb = b.sample(b.default_n(512))
    gap = float(np.sqrt(((sa[:, None] - sb[None]) ** 2).sum(-1)).min())
    scale = max(a.diameter, b.diameter)
    if gap < 1e-3 * scale:
        warnings.warn(f"curves nearly touch (gap {gap:.3g}); accuracy degraded", NearContactWarning)

    def dots_at(m):
        return -0.25 * torus_sum(a, b, dots_density, m, m)

    if n is None:
        m = max(a.default_n(128), b.default_n(128))
        prev = dots_at(m)
        while m < n_max:
            m *= 2
            cur = dots_at(m)
            done = abs(cur - prev) <= rtol * max(1.0, abs(cur))
            prev = cur
            if done:
                break
        n, val = m, prev
    else:
        val = dots_at(n)
    cc = -0.5 * torus_sum(a, b, coscos_density, n, n)
    return MutualEnergy(val, cc, n)


def additivity_check(K1, K2, n: int | None = None) -> dict:
    """Residual of ``E(K_1 u K_2) = E(K_1) + E(K_2) + 2 E(K_1, K_2)``."""
    a, b = _as_space(K1)[0], _as_space(K2)[0]
    e_union = space_energy([a, b], n).value
    e1 = space_energy(a, n).value
    e2 = space_energy(b, n).value
    e12 = mutual_energy_space(a, b).value
    return {
        "union": e_union,
        "E1": e1,
        "E2": e2,
        "mutual": e12,
        "residual": e_union - (e1 + e2 + 2 * e12),
    }


# ---------------------------------------------------------------------------
# writhe


def writhe(K, n: int | None = None, *, richardson: bool = True) -> float:
    """``W(K) = (1/4 pi) \\iint sin(tau) sin(theta_p) sin(theta_q) dp dq / r^2``.

    The integrand is continuous but has a kink ``~ |t - s|`` on the diagonal,
    so the trapezoid rule converges like ``h^2``; one Richardson step on
    grids ``n`` and ``2n`` restores high order.
    """
    c = _as_space(K)[0]
    n = n or c.default_n(256)

    def w_at(m):
        return torus_sum(c, c, writhe_density, m, diagonal=np.zeros(m)) / (4 * np.pi)

    if not richardson:
        return w_at(n)
    return (4.0 * w_at(2 * n) - w_at(n)) / 3.0


def _fibonacci_sphere(m: int) -> np.ndarray:
    i = np.arange(m) + 0.5
    z = 1.0 - 2.0 * i / m
    phi = np.pi * (1 + 5**0.5) * i
    r = np.sqrt(1 - z * z)
    return np.stack([r * np.cos(phi), r * np.sin(phi), z], axis=1)


def _random_rotation(rng) -> np.ndarray:
    q, r = np.linalg.qr(rng.standard_normal((3, 3)))
    q = q * np.sign(np.diag(r))
    if np.linalg.det(q) < 0:
        q[:, 0] = -q[:, 0]
    return q


def directional_writhe(K: ClosedCurve, v, n_poly: int = 600) -> int:
    """Signed crossing number of the projection of a fine polyline of K along ``v``.

    A crossing counts +1 when ``(T_over x T_under) . v > 0`` with ``v``
    pointing toward the viewer.
    """
    c = _as_space(K)[0]
    v = np.asarray(v, float)
    v = v / np.linalg.norm(v)
    P = c.sample(n_poly)
    D = np.roll(P, -1, axis=0) - P
    e1 = np.cross(v, [1.0, 0, 0] if abs(v[0]) < 0.9 else [0, 1.0, 0])
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(v, e1)
    x = np.stack([P @ e1, P @ e2], 1)
    dx = np.stack([D @ e1, D @ e2], 1)
    # segment i: x_i + a dx_i ; segment j: x_j + b dx_j
    den = dx[:, None, 0] * dx[None, :, 1] - dx[:, None, 1] * dx[None, :, 0]
    rx = x[None, :, 0] - x[:, None, 0]
    ry = x[None, :, 1] - x[:, None, 1]
    with np.errstate(divide="ignore", invalid="ignore"):
        a = (rx * dx[None, :, 1] - ry * dx[None, :, 0]) / den
        b = (rx * dx[:, None, 1] - ry * dx[:, None, 0]) / den
    idx = np.arange(n_poly)
    far = np.abs((idx[:, None] - idx[None, :] + 1) % n_poly - 1) > 1
    hit = far & (a >= 0) & (a < 1) & (b >= 0) & (b < 1) & (idx[:, None] < idx[None, :])
    i, j = np.nonzero(hit)
    hi_ = (P[i] + a[i, j, None] * D[i]) @ v
    hj_ = (P[j] + b[i, j, None] * D[j]) @ v
    over_i = hi_ > hj_
    To = np.where(over_i[:, None], D[i], D[j])
    Tu = np.where(over_i[:, None], D[j], D[i])
    return int(np.sign(np.cross(To, Tu) @ v).sum())


def writhe_projection(K, n_dirs: int = 100, seed: int = 0, n_poly: int = 600) -> tuple[float, float]:
    """Average directional writhe over ``n_dirs`` directions (randomly rotated Fibonacci set).

    Returns ``(mean, spread / sqrt(n_dirs))``.
    """
    rng = np.random.default_rng(seed)
    dirs = _fibonacci_sphere(n_dirs) @ _random_rotation(rng).T
    vals = np.array([directional_writhe(K, v, n_poly) for v in dirs], float)
    return float(vals.mean()), float(vals.std(ddof=1) / np.sqrt(n_dirs))
