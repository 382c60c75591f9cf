"""Monte Carlo integral geometry: circles and lines linking curves.

The invariant measure on oriented circles in space is
``d gamma = r^-4 dr dc du`` with ``c`` the center (Lebesgue measure), ``r``
the radius and ``u`` the unit normal (area measure on the sphere).  A circle
can meet the spanning disk of ``K`` only if ``dist(c, K) <= r``, so centers
are drawn from the union of ``r``-balls around the curve.  The sampling
density of the center is evaluated exactly from the parameter measure of
``{t : |K(t) - c| <= r}``.

Every sample batch has its own counter-based generator keyed by
``(seed, batch index)``, so results do not depend on the thread count.
"""
from __future__ import annotations

import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import kernels
from .curves import TWO_PI, ClosedCurve, GeometryError, ReliabilityWarning, uniform_grid
from .planar import segment_pair_sum  # noqa: F401  (re-exported line utility)
from .quadrature import torus_sum
from .renorm import fit_coefficients

THREADS_ENV = "MOEBIUS_ENERGY_THREADS"
SPACE_CONSTANT = 3.0 / (16.0 * np.pi)


class DegenerateSampleError(GeometryError):
    """A crossing is tangential within tolerance."""


def batch_generator(seed: int, batch: int) -> np.random.Generator:
    """Counter-based generator for one sample batch."""
    return np.random.Generator(np.random.Philox(key=np.array([seed, batch], dtype=np.uint64)))


def resolve_threads(threads: int | None = None) -> int:
    if threads is not None:
        return max(1, int(threads))
    env = os.environ.get(THREADS_ENV)
    if env:
        return max(1, int(env))
    return 1


def _space_curves(K) -> list[ClosedCurve]:
    if isinstance(K, ClosedCurve):
        K = [K]
    return [c if c.dimension == 3 else c.embed3() for c in K]


@dataclass(frozen=True)
class Circle3:
    center: np.ndarray
    radius: float
    normal: np.ndarray

    def __post_init__(self):
        n = np.asarray(self.normal, float)
        if self.radius <= 0:
            raise ValueError("radius must be positive")
        object.__setattr__(self, "center", np.asarray(self.center, float))
        object.__setattr__(self, "normal", n / np.linalg.norm(n))

    def flipped(self) -> "Circle3":
        return Circle3(self.center, self.radius, -self.normal)


def linking_circle(gamma: Circle3, K) -> tuple[int, int]:
    """Linking number of ``gamma`` with ``K`` and number of points of ``K`` in its disk.

    Raises
    ------
    DegenerateSampleError
        A crossing is tangential or lies on the circle within tolerance.
    """
    lam = hits = 0
    for c in _space_curves(K):
        l_, h_, st = kernels.plane_crossings(
            c, gamma.center[None, :], gamma.normal[None, :], np.array([gamma.radius])
        )
        if st[0]:
            raise DegenerateSampleError("tangential crossing of the circle's disk")
        lam += int(l_[0])
        hits += int(h_[0])
    return lam, hits


def linking_line(point, direction, K, side=None) -> int:
    """Linking number of the oriented line ``point + s direction`` with closed ``K``.

    Computed as the signed count of crossings of ``K`` through a half-plane
    bounded by the line.
    """
    v = np.asarray(direction, float)
    v = v / np.linalg.norm(v)
    if side is None:
        side = np.cross(v, [1.0, 0, 0] if abs(v[0]) < 0.9 else [0, 1.0, 0])
    w = np.asarray(side, float)
    w = w - (w @ v) * v
    w /= np.linalg.norm(w)
    U = np.cross(v, w)
    lam = 0
    for c in _space_curves(K):
        l_, _, st = kernels.plane_crossings(
            c, np.asarray(point, float)[None, :], U[None, :], W=w[None, :], mode="half-plane"
        )
        if st[0]:
            raise DegenerateSampleError("line passes tangentially near the curve")
        lam += int(l_[0])
    return lam


# ---------------------------------------------------------------------------
# estimates


@dataclass
class MCEstimate:
    mean: float
    stderr: float
    n_samples: int
    r_min: float = float("nan")
    r_max: float = float("nan")
    tail_bound: float = 0.0
    discard_rate: float = 0.0
    tail_correction: float = 0.0
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        _check_discards(self.discard_rate)

    def to_dict(self) -> dict:
        return {
            "mean": self.mean,
            "stderr": self.stderr,
            "n_samples": self.n_samples,
            "r_min": self.r_min,
            "r_max": self.r_max,
            "tail_bound": self.tail_bound,
            "tail_correction": self.tail_correction,
            "discard_rate": self.discard_rate,
            **{k: v for k, v in self.extra.items() if np.isscalar(v)},
        }

    def within(self, target: float, k: float = 3.0) -> bool:
        return abs(self.mean - target) <= k * self.stderr + self.tail_bound


def _run_batches(fn: Callable[[np.random.Generator, int], np.ndarray], n_samples: int, seed: int,
                 threads: int | None, batch: int | None = None):
    """Evaluate ``fn(rng, m)`` over batches; returns per-batch sums (columns) and counts."""
    batch = batch or max(2000, min(50_000, n_samples // 40))
    n_batches = max(2, -(-n_samples // batch))
    sizes = [min(batch, n_samples - i * batch) if i < n_batches - 1 else n_samples - (n_batches - 1) * batch
             for i in range(n_batches)]
    sizes = [max(1, s) for s in sizes]

    def one(i):
        return fn(batch_generator(seed, i), sizes[i])

    nt = resolve_threads(threads)
    if nt > 1:
        with ThreadPoolExecutor(nt) as ex:
            res = list(ex.map(one, range(n_batches)))
    else:
        res = [one(i) for i in range(n_batches)]
    return res, np.array(sizes)


def _check_discards(rate: float, limit: float = 0.01):
    if rate > limit:
        warnings.warn(f"{100 * rate:.2f}% of samples discarded as degenerate", ReliabilityWarning, stacklevel=3)


def _batch_mean_se(sums: np.ndarray, sizes: np.ndarray) -> tuple[float, float]:
    means = sums / sizes
    total = float(sums.sum() / sizes.sum())
    k = len(sizes)
    w = sizes / sizes.sum()
    var = float(np.sum(w * (means - total) ** 2) * k / (k - 1)) / k
    return total, float(np.sqrt(var))


# ---------------------------------------------------------------------------
# circle sampling


def _uniform_sphere(rng, m):
    v = rng.standard_normal((m, 3))
    return v / np.linalg.norm(v, axis=1)[:, None]


def _uniform_ball(rng, m):
    return _uniform_sphere(rng, m) * rng.random(m)[:, None] ** (1.0 / 3.0)


class CircleSampler:
    """Importance sampler for circles near a curve system.

    Parameters
    ----------
    curves : curve or list of curves
    r_min, r_max : float
        Radius window.
    radial : {"log", "r4", "mix", "fixed"}
        Radius proposal: log-uniform, ``~ r^-4``, an equal mixture of the
        two, or the single radius
        ``r_min`` (then ``r_max`` is ignored and weights omit the ``dr``
        factor).
    """

    def __init__(self, curves, r_min: float, r_max: float, radial: str = "log"):
        if r_min <= 0:
            raise ValueError("r_min must be positive")
        if radial != "fixed" and r_max <= r_min:
            raise ValueError("r_max must exceed r_min")
        self.curves = _space_curves(curves)
        L = np.array([c.length for c in self.curves])
        self.q = L / L.sum()
        self.r_min, self.r_max, self.radial = float(r_min), float(r_max), radial

    def _radii(self, rng, m):
        a, b = self.r_min, self.r_max
        u = rng.random(m)
        if self.radial == "fixed":
            return np.full(m, a), np.ones(m)
        if self.radial == "log":
            r = a * (b / a) ** u
            return r, 1.0 / (r * np.log(b / a))
        lo, hi = a**-3, b**-3
        if self.radial == "r4":
            r = (lo - u * (lo - hi)) ** (-1.0 / 3.0)
            return r, 3.0 * r**-4 / (lo - hi)
        if self.radial == "mix":
            # defensive mixture of the two proposals
            pick = rng.random(m) < 0.5
            r = np.where(pick, a * (b / a) ** u, (lo - u * (lo - hi)) ** (-1.0 / 3.0))
            return r, 0.5 / (r * np.log(b / a)) + 1.5 * r**-4 / (lo - hi)
        raise ValueError(f"unknown radial proposal {self.radial!r}")

    def center_density(self, c, r):
        """Exact density of the center given the radius."""
        dens = np.zeros(c.shape[0])
        vol = 4.0 / 3.0 * np.pi * r**3
        for qk, K in zip(self.q, self.curves):
            ell, _ = kernels.ball_param_lengths(K, c, r)
            dens += qk * ell / (TWO_PI * vol)
        return dens

    def draw(self, rng, m):
        """Return ``(centers, radii, normals, weight)`` with ``weight = measure / proposal``."""
        r, pr = self._radii(rng, m)
        k = rng.choice(len(self.curves), size=m, p=self.q)
        t = rng.random(m) * TWO_PI
        base = np.empty((m, 3))
        for j, K in enumerate(self.curves):
            sel = k == j
            base[sel] = K.evaluate(t[sel])
        c = base + r[:, None] * _uniform_ball(rng, m)
        u = _uniform_sphere(rng, m)
        pc = self.center_density(c, r)
        with np.errstate(divide="ignore"):
            w = np.where(pc > 0, r**-4 / (pr * pc / (4.0 * np.pi)), 0.0)
        if self.radial == "fixed":
            w = np.where(pc > 0, 4.0 * np.pi / pc, 0.0)
        return c, r, u, w


def sample_circles(curves, count: int, seed: int, *, r_min: float, r_max: float, radial: str = "log"):
    """Weighted circles ``(Circle3, weight)`` for the measure ``d gamma`` on the window."""
    s = CircleSampler(curves, r_min, r_max, radial)
    c, r, u, w = s.draw(batch_generator(seed, 0), count)
    for i in range(count):
        yield Circle3(c[i], float(r[i]), u[i]), float(w[i])


def _counts(curves, c, u, r):
    lam = np.zeros(c.shape[0], dtype=np.int64)
    hits = np.zeros(c.shape[0], dtype=np.int64)
    bad = np.zeros(c.shape[0], dtype=bool)
    lams = []
    for K in curves:
        l_, h_, st = kernels.plane_crossings(K, c, u, r)
        lam += l_
        hits += h_
        bad |= st.astype(bool)
        lams.append(l_)
    return lam, hits, bad, lams


def _window(curves, r_min, r_max):
    diam = max(c.diameter for c in curves)
    if len(curves) > 1:
        pts = np.concatenate([c.sample(256) for c in curves])
        diam = float(np.sqrt(((pts[:, None] - pts[None]) ** 2).sum(-1)).max())
    return (r_min if r_min is not None else 1e-3 * diam), (r_max if r_max is not None else 30.0 * diam), diam


def mc_energy_circles(
    K,
    n_samples: int = 200_000,
    seed: int = 0,
    *,
    r_min: float | None = None,
    r_max: float | None = None,
    threads: int | None = None,
) -> MCEstimate:
    """``E(K) = 3/(16 pi) \\int (#(K n [gamma]) - lambda^2) d gamma`` by Monte Carlo.

    The exact measure ``2 pi^2 L / r_max`` of disk hits by circles larger
    than ``r_max`` is added back; the remaining ``lambda^2`` tail is
    bounded by ``3 L^2 / (16 r_max^2)``.
    """
    curves = _space_curves(K)
    r_min, r_max, _ = _window(curves, r_min, r_max)
    L = sum(c.length for c in curves)
    sampler = CircleSampler(curves, r_min, r_max, "log")

    def fn(rng, m):
        c, r, u, w = sampler.draw(rng, m)
        lam, hits, bad, _ = _counts(curves, c, u, r)
        f = np.where(bad, 0.0, w * (hits - lam.astype(float) ** 2))
        return np.array([f.sum(), bad.sum(), np.sum((hits <= 1) & (hits - lam**2 != 0))])

    res, sizes = _run_batches(fn, n_samples, seed, threads)
    arr = np.array(res)
    mean, se = _batch_mean_se(arr[:, 0], sizes)
    tail = 2 * np.pi**2 * L / r_max
    est = MCEstimate(
        SPACE_CONSTANT * (mean + tail),
        SPACE_CONSTANT * se,
        int(sizes.sum()),
        r_min,
        r_max,
        tail_bound=3 * L**2 / (16 * r_max**2),
        discard_rate=float(arr[:, 1].sum() / sizes.sum()),
        tail_correction=SPACE_CONSTANT * tail,
        extra={"single_hit_violations": int(arr[:, 2].sum())},
    )
    return est


def mc_mutual_circles(
    K1,
    K2,
    n_samples: int = 200_000,
    seed: int = 0,
    *,
    r_min: float | None = None,
    r_max: float | None = None,
    threads: int | None = None,
) -> MCEstimate:
    """``E(K_1, K_2) = -3/(16 pi) \\int lambda(gamma, K_1) lambda(gamma, K_2) d gamma``."""
    c1, c2 = _space_curves(K1), _space_curves(K2)
    curves = c1 + c2
    r_min, r_max, _ = _window(curves, r_min, r_max)
    sampler = CircleSampler(curves, r_min, r_max, "log")
    L1 = sum(c.length for c in c1)
    L2 = sum(c.length for c in c2)

    def fn(rng, m):
        c, r, u, w = sampler.draw(rng, m)
        _, _, bad, lams = _counts(curves, c, u, r)
        l1 = sum(lams[: len(c1)])
        l2 = sum(lams[len(c1) :])
        f = np.where(bad, 0.0, w * l1 * l2)
        return np.array([f.sum(), bad.sum()])

    res, sizes = _run_batches(fn, n_samples, seed, threads)
    arr = np.array(res)
    mean, se = _batch_mean_se(arr[:, 0], sizes)
    return MCEstimate(
        -SPACE_CONSTANT * mean,
        SPACE_CONSTANT * se,
        int(sizes.sum()),
        r_min,
        r_max,
        tail_bound=3 * L1 * L2 / (16 * r_max**2),
        discard_rate=float(arr[:, 1].sum() / sizes.sum()),
    )


@dataclass
class CutoffLadder:
    eps: np.ndarray
    lambda2: np.ndarray  # \int_{S_eps} lambda^2 d gamma
    lambda2_se: np.ndarray
    hits: np.ndarray  # \int_{S_eps} hits d gamma
    hits_se: np.ndarray
    length: float
    r_max: float
    deficit: np.ndarray  # \int_{S_eps} (hits - lambda^2) d gamma
    deficit_se: np.ndarray

    @property
    def lambda2_cv(self) -> np.ndarray:
        """``\\int_{S_eps} lambda^2`` using the exact hits integral as control variate."""
        return self.hits_expected - self.deficit

    @property
    def energy(self) -> np.ndarray:
        """``3 pi L / (8 eps) - 3/(16 pi) \\int_{S_eps} lambda^2`` (raw estimate)."""
        return 3 * np.pi * self.length / (8 * self.eps) - SPACE_CONSTANT * self.lambda2

    @property
    def energy_cv(self) -> np.ndarray:
        return 3 * np.pi * self.length / (8 * self.eps) - SPACE_CONSTANT * self.lambda2_cv

    def counterterm_fit(self) -> dict:
        """Fit ``-3/(16 pi) \\int_{S_eps} lambda^2`` by ``{1/eps, 1, eps}``."""
        return fit_coefficients(self.eps, -SPACE_CONSTANT * self.lambda2, [-1, 0, 1])

    @property
    def hits_expected(self) -> np.ndarray:
        return 2 * np.pi**2 * self.length / self.eps


def mc_cutoff_ladder(
    K,
    eps: Sequence[float],
    n_samples: int = 200_000,
    seed: int = 0,
    *,
    r_max: float | None = None,
    threads: int | None = None,
) -> CutoffLadder:
    """Estimates of ``\\int_{S_eps} lambda^2 d gamma`` and ``\\int_{S_eps} hits d gamma`` for several eps.

    One run on ``[min eps, r_max]`` serves every rung (common random
    numbers).  Radii come from an equal mixture of ``r^-4`` and log-uniform
    proposals, so both small circles and circles of the size of ``K`` are
    well represented.  The hits integrals include the
    exact contribution ``2 pi^2 L / r_max`` of larger circles.
    """
    curves = _space_curves(K)
    eps = np.sort(np.asarray(eps, float))[::-1]
    _, r_max, _ = _window(curves, None, r_max)
    L = sum(c.length for c in curves)
    sampler = CircleSampler(curves, float(eps.min()), r_max, "mix")

    def fn(rng, m):
        c, r, u, w = sampler.draw(rng, m)
        lam, hits, bad, _ = _counts(curves, c, u, r)
        w = np.where(bad, 0.0, w)
        rows = []
        for e in eps:
            sel = r > e
            rows.append([np.sum(w * sel * lam**2), np.sum(w * sel * hits), np.sum(w * sel * (hits - lam**2))])
        return np.array(rows)

    res, sizes = _run_batches(fn, n_samples, seed, threads)
    arr = np.array(res)  # batches x eps x 2
    l2, l2se, h, hse, dd, dse = [], [], [], [], [], []
    for k in range(eps.size):
        m_, s_ = _batch_mean_se(arr[:, k, 2], sizes)
        dd.append(m_)
        dse.append(s_)
        m_, s_ = _batch_mean_se(arr[:, k, 0], sizes)
        l2.append(m_)
        l2se.append(s_)
        m_, s_ = _batch_mean_se(arr[:, k, 1], sizes)
        h.append(m_ + 2 * np.pi**2 * L / r_max)
        hse.append(s_)
    return CutoffLadder(eps, np.array(l2), np.array(l2se), np.array(h), np.array(hse), L, r_max,
                        np.array(dd), np.array(dse))


# ---------------------------------------------------------------------------
# lines in space


def _bounding_ball(curves):
    pts = np.concatenate([c.sample(c.default_n(256)) for c in curves])
    ctr = 0.5 * (pts.min(0) + pts.max(0))
    return ctr, float(np.linalg.norm(pts - ctr, axis=1).max()) * 1.01


def mc_lines_linking(K1, K2=None, n_samples: int = 200_000, seed: int = 0, *, threads: int | None = None) -> MCEstimate:
    """``\\int_{A(1,3)} lambda(l, K_1) lambda(l, K_2) dl`` with ``dl = dv dx`` on oriented lines.

    ``v`` is uniform on the sphere and ``x`` uniform in a disk of the plane
    orthogonal to ``v`` that contains the projection of every curve.
    """
    c1 = _space_curves(K1)
    c2 = c1 if K2 is None else _space_curves(K2)
    ctr, rho = _bounding_ball(c1 + ([] if K2 is None else c2))
    area = 4 * np.pi * np.pi * rho**2

    def lam_of(curves, x, v, w):
        U = np.cross(v, w)
        tot = np.zeros(x.shape[0], dtype=np.int64)
        bad = np.zeros(x.shape[0], dtype=bool)
        for c in curves:
            l_, _, st = kernels.plane_crossings(c, x, U, W=w, mode="half-plane")
            tot += l_
            bad |= st.astype(bool)
        return tot, bad

    def fn(rng, m):
        v = _uniform_sphere(rng, m)
        a = np.cross(v, np.where(np.abs(v[:, :1]) < 0.9, [[1.0, 0, 0]], [[0, 1.0, 0]]))
        a /= np.linalg.norm(a, axis=1)[:, None]
        b = np.cross(v, a)
        rad = rho * np.sqrt(rng.random(m))
        phi = rng.random(m) * TWO_PI
        x = ctr + rad[:, None] * (np.cos(phi)[:, None] * a + np.sin(phi)[:, None] * b)
        # random half-plane orientation about the line
        psi = rng.random(m) * TWO_PI
        w = np.cos(psi)[:, None] * a + np.sin(psi)[:, None] * b
        l1, b1 = lam_of(c1, x, v, w)
        if K2 is None:
            l2, b2 = l1, b1
        else:
            l2, b2 = lam_of(c2, x, v, w)
        bad = b1 | b2
        f = np.where(bad, 0.0, area * l1 * l2)
        return np.array([f.sum(), bad.sum()])

    res, sizes = _run_batches(fn, n_samples, seed, threads)
    arr = np.array(res)
    mean, se = _batch_mean_se(arr[:, 0], sizes)
    return MCEstimate(mean, se, int(sizes.sum()), discard_rate=float(arr[:, 1].sum() / sizes.sum()))


def _coscos(P, Tp, Q, Tq):
    d = Q - P
    r2 = (d * d).sum(-1)
    return (Tp * d).sum(-1) * (Tq * d).sum(-1) / r2


def coscos_pair_integral(K1, K2=None, n: int | None = None) -> float:
    """``\\iint cos(theta_1) cos(theta_2) dp_1 dp_2`` (no distance weight).

    Without ``K2`` the sum runs over all ordered component pairs of ``K1``,
    self-pairs included; the diagonal limit of the integrand is 1.
    """
    a = _space_curves(K1)
    b = a if K2 is None else _space_curves(K2)
    total = 0.0
    for i, ca in enumerate(a):
        for j, cb in enumerate(b):
            m = n or max(ca.default_n(256), cb.default_n(256))
            if K2 is None and i == j:
                total += torus_sum(ca, ca, _coscos, m, diagonal=np.ones(m))
            else:
                total += torus_sum(ca, cb, _coscos, m, m)
    return total


@dataclass
class BPCheck:
    lhs: MCEstimate
    rhs: float
    constant: float
    constant_se: float = 0.0

    @property
    def residual(self) -> float:
        return self.constant * self.lhs.mean - self.rhs

    @property
    def residual_se(self) -> float:
        """Combines the sampling error of both the instance and the calibration."""
        return float(np.hypot(self.constant * self.lhs.stderr, self.lhs.mean * self.constant_se))

    def passes(self, k: float = 3.0, atol: float = 1e-9) -> bool:
        return abs(self.residual) <= k * self.residual_se + atol


def calibrate_line_constant(n_samples: int = 200_000, seed: int = 0, *, threads=None) -> tuple[float, float]:
    """Line-measure constant from two coaxial unit circles one unit apart.

    Returns ``(constant, standard error)`` with ``constant = rhs / lhs``.
    """
    k1 = ClosedCurve.circle(1.0, center=(0, 0, 0), normal=(0, 0, 1))
    k2 = ClosedCurve.circle(1.0, center=(0, 0, 1), normal=(0, 0, 1))
    lhs = mc_lines_linking(k1, k2, n_samples, seed, threads=threads)
    rhs = coscos_pair_integral(k1, k2)
    const = rhs / lhs.mean
    return const, abs(const) * lhs.stderr / abs(lhs.mean)


def bp_lines_check(K1, K2=None, n_samples: int = 200_000, seed: int = 0, *, constant: float = 1.0,
                   constant_se: float = 0.0, threads=None) -> BPCheck:
    """Compare ``C * \\int lambda_1 lambda_2 dl`` with ``\\iint cos cos dp_1 dp_2``.

    With one curve both sides use ``lambda^2`` and the self-pair integral.
    """
    lhs = mc_lines_linking(K1, K2, n_samples, seed, threads=threads)
    rhs = coscos_pair_integral(K1, K2)
    return BPCheck(lhs, rhs, constant, constant_se)


# ---------------------------------------------------------------------------
# lines in the plane


def crofton_length(K, n_samples: int = 100_000, seed: int = 0, *, threads=None) -> MCEstimate:
    """``\\int_{A(1,2)} #(l n K) dl`` with ``dl = dr d theta``; equals ``2 L(K)``.

    Lines ``x . u(theta) = r`` with ``theta`` uniform on ``[0, 2 pi)`` and
    ``r`` uniform on ``[0, rho]`` about the center of a bounding disk.
    """
    curves = _space_curves(K)
    ctr, rho = _bounding_ball(curves)
    big = 1e6 * rho

    def fn(rng, m):
        th = rng.random(m) * TWO_PI
        r = rng.random(m) * rho
        U = np.stack([np.cos(th), np.sin(th), np.zeros(m)], 1)
        C = ctr + r[:, None] * U
        tot = np.zeros(m)
        bad = np.zeros(m, dtype=bool)
        for c in curves:
            _, h_, st = kernels.plane_crossings(c, C, U, np.full(m, big))
            tot += h_
            bad |= st.astype(bool)
        f = np.where(bad, 0.0, TWO_PI * rho * tot)
        return np.array([f.sum(), bad.sum()])

    res, sizes = _run_batches(fn, n_samples, seed, threads)
    arr = np.array(res)
    mean, se = _batch_mean_se(arr[:, 0], sizes)
    return MCEstimate(mean, se, int(sizes.sum()), discard_rate=float(arr[:, 1].sum() / sizes.sum()))


# ---------------------------------------------------------------------------
# chord distribution and linked circles of fixed radius


def chord_distribution(K, s_grid, n: int | None = None) -> np.ndarray:
    """``A_K(s) = \\int_K sum_{q : |q - p| = s} cos(theta_p) sign(cos theta_q) dp``.

    For each ``p`` on a grid the level set ``|K(t) - p| = s`` is found by
    root finding in ``t``; the sum over its points is integrated over
    ``p`` by the trapezoid rule.  ``A_K(s) -> 2 L(K)`` as ``s -> 0``.
    """
    from .roots import bracketed_newton, sign_change_brackets

    curves = _space_curves(K)
    s_grid = np.atleast_1d(np.asarray(s_grid, float))
    out = np.zeros(s_grid.size)
    for cp in curves:
        n_p = n or cp.default_n(512)
        tp = uniform_grid(n_p)
        P, D1 = cp.evaluate_many(tp, (0, 1))
        sp = np.linalg.norm(D1, axis=1)
        Tp = D1 / sp[:, None]
        for cq in curves:
            ng = max(512, 16 * cq.modes)
            tg = uniform_grid(ng)
            Q = cq.sample(ng)
            dist2 = ((Q[None, :, :] - P[:, None, :]) ** 2).sum(-1)
            for k, s in enumerate(s_grid):
                vals = dist2 - s * s
                rows, lo, hi = sign_change_brackets(vals, tg)
                if rows.size == 0:
                    continue

                def f(t, rows=rows, s=s):
                    d = cq.evaluate(t) - P[rows]
                    return (d * d).sum(-1) - s * s

                def df(t, rows=rows):
                    d = cq.evaluate(t) - P[rows]
                    return 2 * (d * cq.evaluate(t, 1)).sum(-1)

                t = bracketed_newton(f, df, lo, hi)
                qq, dq = cq.evaluate_many(t, (0, 1))
                d = qq - P[rows]
                cos_p = (Tp[rows] * d).sum(-1) / s
                sgn_q = np.sign((dq * d).sum(-1))
                out[k] += float(np.sum(cos_p * sgn_q * sp[rows])) * TWO_PI / n_p
    return out


def dcb_radius_measure(K, r: float, n_phi: int = 64, n: int | None = None) -> float:
    """``f(r, K) = pi \\int_0^{2r} A_K(s) sqrt(4 r^2 - s^2) ds``.

    Evaluated as ``4 pi r^2 \\int_0^{pi/2} A_K(2 r sin phi) cos^2 phi d phi``
    with Gauss-Legendre nodes, split where ``2 r sin phi`` reaches the
    diameter of the curve (``A_K`` vanishes beyond it).
    """
    from .quadrature import gauss_legendre

    curves = _space_curves(K)
    pts = np.concatenate([c.sample(512) for c in curves])
    diam = float(np.sqrt(((pts[:, None] - pts[None]) ** 2).sum(-1)).max())
    top = np.pi / 2 if 2 * r <= diam else float(np.arcsin(min(1.0, diam / (2 * r))))
    x, w = gauss_legendre(n_phi)
    phi = 0.5 * top * (x + 1)
    wphi = 0.5 * top * w
    A = chord_distribution(curves, 2 * r * np.sin(phi), n)
    return float(4 * np.pi * r * r * np.sum(wphi * A * np.cos(phi) ** 2))


def mc_fixed_radius(K, r: float, n_samples: int = 200_000, seed: int = 0, *, threads=None) -> MCEstimate:
    """``\\int lambda(gamma, K)^2 dc du`` over circles of the fixed radius ``r``."""
    curves = _space_curves(K)
    sampler = CircleSampler(curves, r, r, "fixed")

    def fn(rng, m):
        c, rr, u, w = sampler.draw(rng, m)
        lam, _, bad, _ = _counts(curves, c, u, rr)
        f = np.where(bad, 0.0, w * lam.astype(float) ** 2)
        return np.array([f.sum(), bad.sum()])

    res, sizes = _run_batches(fn, n_samples, seed, threads)
    arr = np.array(res)
    mean, se = _batch_mean_se(arr[:, 0], sizes)
    return MCEstimate(mean, se, int(sizes.sum()), r, r, discard_rate=float(arr[:, 1].sum() / sizes.sum()))
