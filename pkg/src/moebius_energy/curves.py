"""Closed curves in truncated Fourier form and planar domains bounded by them.

A curve is ``K(t) = a0 + sum_k a_k cos(kt) + b_k sin(kt)`` for ``k = 1..M``
with period ``2*pi``.  Derivatives are exact (spectral) and periodic
trapezoid sums over uniform grids converge geometrically for these curves,
which is what every energy integrand downstream relies on.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Sequence

import numpy as np
from scipy.spatial import cKDTree

TWO_PI = 2.0 * np.pi


class ReliabilityWarning(RuntimeWarning):
    """A result was returned but its accuracy is degraded."""


class GeometryError(ValueError):
    """Input geometry violates a precondition (overlap, bad nesting, ...)."""


class DegenerateCurveError(GeometryError):
    """Curve is not regular (vanishing speed) or a chord is degenerate."""


class OffsetError(GeometryError):
    """A parallel curve at the requested distance is singular or not embedded."""

    def __init__(self, msg: str, bound: float):
        super().__init__(msg)
        self.bound = bound


def uniform_grid(n: int) -> np.ndarray:
    return TWO_PI * np.arange(n) / n


def _cross2(u, v):
    return u[..., 0] * v[..., 1] - u[..., 1] * v[..., 0]


class ClosedCurve:
    """Smooth closed curve in R^2 or R^3 with a truncated Fourier parametrization.

    Parameters
    ----------
    a0 : array_like, shape (d,)
        Constant term.
    a, b : array_like, shape (M, d)
        Cosine and sine amplitudes for modes ``k = 1..M``.
    check : bool
        Verify regularity on a dense grid.
    """

    def __init__(self, a0, a, b, *, check: bool = True, fit_residual: float = 0.0):
        a0 = np.atleast_1d(np.asarray(a0, dtype=float)).copy()
        d = a0.shape[0]
        if d not in (2, 3):
            raise ValueError("dimension must be 2 or 3")
        a = np.asarray(a, dtype=float).reshape(-1, d).copy()
        b = np.asarray(b, dtype=float).reshape(-1, d).copy()
        if a.shape != b.shape:
            raise ValueError("cosine and sine coefficient arrays differ in shape")
        for arr in (a0, a, b):
            arr.setflags(write=False)
        self.a0, self.a, self.b = a0, a, b
        self.fit_residual = float(fit_residual)
        self._cache: dict = {}
        if check:
            self._check_regular()

    # -- basic structure -------------------------------------------------
    @property
    def dimension(self) -> int:
        return self.a0.shape[0]

    @property
    def modes(self) -> int:
        return self.a.shape[0]

    @cached_property
    def _chat(self) -> np.ndarray:
        # complex amplitudes: x = a0 + Re sum_k chat_k e^{ikt}
        return self.a - 1j * self.b

    def __repr__(self) -> str:
        return f"ClosedCurve(dim={self.dimension}, modes={self.modes})"

    def default_n(self, minimum: int = 256) -> int:
        """Grid size that resolves the curve comfortably (power of two)."""
        n = max(minimum, 8 * self.modes)
        return int(2 ** np.ceil(np.log2(n)))

    # -- evaluation ------------------------------------------------------
    def evaluate(self, t, order: int = 0) -> np.ndarray:
        """Point (order 0) or ``order``-th derivative at parameters ``t``.

        Returns an array of shape ``t.shape + (d,)``.
        """
        return self.evaluate_many(t, (order,))[0]

    def evaluate_many(self, t, orders=(0, 1, 2)) -> list[np.ndarray]:
        """Several derivatives at once, sharing the Fourier basis evaluation."""
        t = np.asarray(t, dtype=float)
        shape = t.shape
        t = t.reshape(-1)
        m = self.modes
        k = np.arange(1, m + 1)
        outs = [np.empty((t.size, self.dimension)) for _ in orders]
        step = max(1, 1_000_000 // max(m, 1))
        for i in range(0, t.size, step):
            z = np.exp(1j * t[i : i + step])
            if m <= 8:
                e = np.exp(1j * np.outer(t[i : i + step], k))
            else:
                # powers by repeated multiplication, re-anchored every 32 modes
                e = np.empty((z.size, m), dtype=complex)
                for j0 in range(0, m, 32):
                    j1 = min(m, j0 + 32)
                    base = np.exp(1j * (j0 + 1) * t[i : i + step])
                    e[:, j0] = base
                    for j in range(j0 + 1, j1):
                        e[:, j] = e[:, j - 1] * z
            for o, out in zip(orders, outs):
                out[i : i + step] = (e @ (((1j * k) ** o)[:, None] * self._chat)).real
        for o, out in zip(orders, outs):
            if o == 0:
                out += self.a0
        return [out.reshape(shape + (self.dimension,)) for out in outs]

    __call__ = evaluate

    def sample(self, n: int, order: int = 0) -> np.ndarray:
        """Values of the ``order``-th derivative on the uniform grid of size ``n``."""
        key = ("sample", n, order)
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        m = self.modes
        if n <= 2 * m:
            vals = self.evaluate(uniform_grid(n), order)
        else:
            spec = np.zeros((n // 2 + 1, self.dimension), dtype=complex)
            k = np.arange(1, m + 1)
            spec[1 : m + 1] = (n / 2.0) * ((1j * k) ** order)[:, None] * self._chat
            if order == 0:
                spec[0] = n * self.a0
            vals = np.fft.irfft(spec, n=n, axis=0)
        vals.setflags(write=False)
        self._cache[key] = vals
        return vals

    def speed(self, t) -> np.ndarray:
        return np.linalg.norm(self.evaluate(t, 1), axis=-1)

    def curvature(self, t) -> np.ndarray:
        """Signed curvature in the plane, unsigned curvature in space."""
        d1 = self.evaluate(t, 1)
        d2 = self.evaluate(t, 2)
        return _curvature(d1, d2)

    def _check_regular(self):
        n = self.default_n(512)
        sp = np.linalg.norm(self.sample(n, 1), axis=1)
        scale = max(np.abs(self.a).max(initial=0.0), np.abs(self.b).max(initial=0.0))
        if self.modes == 0 or scale == 0.0 or sp.min() <= 1e-10 * scale:
            raise DegenerateCurveError("curve is not regular: |K'(t)| vanishes")

    # -- global quantities -----------------------------------------------
    def arclength(self, n: int | None = None) -> float:
        """Length by the periodic trapezoid rule (spectrally accurate)."""
        n = n or self.default_n(512)
        sp = np.linalg.norm(self.sample(n, 1), axis=1)
        return float(sp.sum() * TWO_PI / n)

    @cached_property
    def length(self) -> float:
        return self.arclength()

    @cached_property
    def diameter(self) -> float:
        pts = self.sample(max(256, 4 * self.modes))
        if pts.shape[0] > 1500:
            pts = pts[:: pts.shape[0] // 1000]
        diff = pts[:, None, :] - pts[None, :, :]
        return float(np.sqrt((diff**2).sum(-1).max()))

    @cached_property
    def centroid(self) -> np.ndarray:
        return self.a0.copy()

    def signed_area(self) -> float:
        """Enclosed signed area (plane only); positive for counterclockwise curves."""
        if self.dimension != 2:
            raise ValueError("signed area is defined for planar curves")
        k = np.arange(1, self.modes + 1)
        a, b = self.a, self.b
        return float(np.pi * np.sum(k * (a[:, 0] * b[:, 1] - b[:, 0] * a[:, 1])))

    def total_curvature(self, n: int | None = None) -> float:
        """Integral of curvature against arc length (signed in the plane)."""
        n = n or self.default_n(512)
        d1, d2 = self.sample(n, 1), self.sample(n, 2)
        sp = np.linalg.norm(d1, axis=1)
        return float(np.sum(_curvature(d1, d2) * sp) * TWO_PI / n)

    def min_self_distance(self, n: int | None = None, exclude: float | None = None) -> float:
        """Smallest distance between points farther apart than ``exclude`` along the curve."""
        n = n or self.default_n(256)
        pts = self.sample(n)
        sp = np.linalg.norm(self.sample(n, 1), axis=1)
        s = np.concatenate([[0.0], np.cumsum(sp)[:-1]]) * TWO_PI / n
        L = sp.sum() * TWO_PI / n
        exclude = exclude if exclude is not None else 0.25 * L / max(self.modes, 1)
        best = np.inf
        for i in range(0, n, 256):
            d = np.linalg.norm(pts[i : i + 256, None, :] - pts[None, :, :], axis=-1)
            ds = np.abs(s[i : i + 256, None] - s[None, :])
            ds = np.minimum(ds, L - ds)
            # only pairs that are far along the curve yet close in space
            mask = ds > np.maximum(exclude, 2.0 * d)
            if mask.any():
                best = min(best, float(d[mask].min()))
        return best

    # -- derived curves --------------------------------------------------
    def reversed(self) -> "ClosedCurve":
        """Same trace, opposite orientation (``t -> -t``)."""
        return ClosedCurve(self.a0, self.a, -self.b, check=False)

    def embed3(self) -> "ClosedCurve":
        """A planar curve viewed in the plane z = 0 of space."""
        if self.dimension == 3:
            return self
        pad = lambda x: np.concatenate([x, np.zeros(x.shape[:-1] + (1,))], axis=-1)
        return ClosedCurve(pad(self.a0), pad(self.a), pad(self.b), check=False)

    def affine(self, matrix=None, shift=None) -> "ClosedCurve":
        """Image under ``x -> matrix @ x + shift`` (exact on coefficients)."""
        A = np.eye(self.dimension) if matrix is None else np.asarray(matrix, float)
        c = np.zeros(self.dimension) if shift is None else np.asarray(shift, float)
        return ClosedCurve(A @ self.a0 + c, self.a @ A.T, self.b @ A.T, check=False)

    def mirrored(self, axis: int = 2) -> "ClosedCurve":
        """Reflection that negates one coordinate."""
        D = np.eye(self.dimension)
        D[axis, axis] = -1.0
        return self.affine(D)

    def reparametrized_shift(self, t0: float) -> "ClosedCurve":
        """Same oriented curve with parameter origin moved to ``t0``."""
        k = np.arange(1, self.modes + 1)[:, None]
        c, s = np.cos(k * t0), np.sin(k * t0)
        return ClosedCurve(self.a0, self.a * c + self.b * s, self.b * c - self.a * s, check=False)

    # -- construction ----------------------------------------------------
    @classmethod
    def from_samples(cls, points, modes: int | None = None, *, check: bool = True) -> "ClosedCurve":
        """Least-squares Fourier fit to samples on a uniform parameter grid.

        On a uniform grid with ``n > 2*modes`` the truncated FFT is the
        least-squares solution, so no linear solve is needed.
        """
        pts = np.asarray(points, dtype=float)
        n = pts.shape[0]
        m = (n - 1) // 2 if modes is None else int(modes)
        if 2 * m >= n:
            raise ValueError("need more than 2*modes samples")
        X = np.fft.rfft(pts, axis=0)
        a0 = X[0].real / n
        a = 2.0 * X[1 : m + 1].real / n
        b = -2.0 * X[1 : m + 1].imag / n
        return cls(a0, a, b, check=check)

    @classmethod
    def from_function(
        cls,
        func: Callable[[np.ndarray], np.ndarray],
        *,
        tol: float = 1e-9,
        min_modes: int = 8,
        max_modes: int = 4096,
        scale: float | None = None,
    ) -> "ClosedCurve":
        """Fit ``func`` (vectorized, 2*pi periodic) with automatically chosen mode count.

        The mode count grows until the pointwise residual on an offset grid is
        below ``tol`` times the curve diameter.
        """
        n = 4 * max(min_modes, 8)
        while True:
            pts = np.asarray(func(uniform_grid(n)), dtype=float)
            if scale is None:
                span = pts.max(axis=0) - pts.min(axis=0)
                scale_ = float(np.linalg.norm(span))
            else:
                scale_ = scale
            X = np.fft.rfft(pts, axis=0)
            amp = np.linalg.norm(np.abs(X), axis=1) * 2.0 / n
            # smallest m whose discarded tail is well below tolerance
            tail = np.cumsum(amp[::-1])[::-1]
            ok = np.nonzero(tail < 0.05 * tol * scale_)[0]
            m = int(ok[0]) - 1 if ok.size else n // 2
            m = max(m, min_modes)
            if 2 * m < n // 2 or m > max_modes:
                m = min(m, max_modes)
                a0 = X[0].real / n
                a = 2.0 * X[1 : m + 1].real / n
                b = -2.0 * X[1 : m + 1].imag / n
                curve = cls(a0, a, b, check=False)
                tt = uniform_grid(n) + np.pi / n
                res = np.abs(curve.evaluate(tt) - np.asarray(func(tt))).max() / scale_
                if res < tol:
                    curve.fit_residual = float(res)
                    curve._check_regular()
                    return curve
                if m >= max_modes:
                    raise GeometryError(
                        f"refit residual {res:.2e} above tolerance at the mode cap {max_modes}"
                    )
            n *= 2
            if n > 16 * max_modes:
                raise GeometryError("refit did not converge within the mode cap")

    @classmethod
    def circle(cls, radius: float = 1.0, center=None, normal=None, dim: int | None = None):
        """Positively oriented circle; in space ``normal`` fixes the plane and orientation."""
        if normal is not None:
            dim = 3
        dim = dim or (len(center) if center is not None else 2)
        c = np.zeros(dim) if center is None else np.asarray(center, float)
        if dim == 2:
            e1, e2 = np.array([1.0, 0.0]), np.array([0.0, 1.0])
        else:
            n = np.array([0.0, 0.0, 1.0]) if normal is None else np.asarray(normal, float)
            e1, e2 = _plane_basis(n)
        return cls(c, (radius * e1)[None, :], (radius * e2)[None, :])

    @classmethod
    def ellipse(cls, a: float = 2.0, b: float = 1.0, center=(0.0, 0.0)):
        return cls(np.asarray(center, float), [[a, 0.0]], [[0.0, b]])

    @classmethod
    def trefoil(cls, scale: float = 1.0):
        """(2,3) torus knot ``((2+cos 3t)cos 2t, (2+cos 3t)sin 2t, sin 3t)``."""
        a = np.zeros((5, 3))
        b = np.zeros((5, 3))
        a[0, 0] = 0.5  # cos t from cos3t cos2t
        a[1, 0] = 2.0
        a[4, 0] = 0.5
        b[0, 1] = -0.5  # cos3t sin2t = (sin5t - sin t)/2
        b[1, 1] = 2.0
        b[4, 1] = 0.5
        b[2, 2] = 1.0
        return cls(np.zeros(3), scale * a, scale * b)

    @classmethod
    def star(cls, amplitudes: Sequence[tuple[int, float, float]], radius: float = 1.0):
        """Star-shaped planar curve ``r(t) = radius + sum c_j cos(k_j t) + s_j sin(k_j t)``."""

        def f(t):
            r = radius + sum(c * np.cos(k * t) + s * np.sin(k * t) for k, c, s in amplitudes)
            return np.stack([r * np.cos(t), r * np.sin(t)], axis=-1)

        return cls.from_function(f, tol=1e-12)

    # -- serialization ---------------------------------------------------
    def to_dict(self) -> dict:
        names = "xyz"[: self.dimension]
        return {
            "dimension": self.dimension,
            "modes": self.modes,
            "coeffs": {
                n: {"a0": float(self.a0[i]), "a": self.a[:, i].tolist(), "b": self.b[:, i].tolist()}
                for i, n in enumerate(names)
            },
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ClosedCurve":
        try:
            dim = int(data["dimension"])
            m = int(data["modes"])
            names = "xyz"[:dim]
            co = data["coeffs"]
            a0 = [float(co[n]["a0"]) for n in names]
            a = np.array([co[n]["a"] for n in names], dtype=float).T
            b = np.array([co[n]["b"] for n in names], dtype=float).T
        except (KeyError, TypeError, ValueError) as exc:
            raise SchemaError(f"malformed curve record: {exc}") from exc
        if dim not in (2, 3) or a.shape != (m, dim) or b.shape != (m, dim):
            raise SchemaError("coefficient arrays do not match 'dimension'/'modes'")
        return cls(a0, a, b)


class SchemaError(ValueError):
    """JSON input does not follow the curve/domain schema."""


def _plane_basis(n):
    n = np.asarray(n, float)
    n = n / np.linalg.norm(n)
    helper = np.array([1.0, 0.0, 0.0]) if abs(n[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
    e1 = helper - (helper @ n) * n
    e1 /= np.linalg.norm(e1)
    return e1, np.cross(n, e1)


def _curvature(d1, d2):
    sp = np.linalg.norm(d1, axis=-1)
    if d1.shape[-1] == 2:
        return _cross2(d1, d2) / sp**3
    return np.linalg.norm(np.cross(d1, d2), axis=-1) / sp**3


# ---------------------------------------------------------------------------
# frames and chords


@dataclass(frozen=True)
class Frame:
    point: np.ndarray
    tangent: np.ndarray
    curvature: np.ndarray
    normal: np.ndarray | None  # principal normal (space) or left normal (plane)
    speed: np.ndarray


def eval_frame(curve: ClosedCurve, t) -> Frame:
    """Point, unit tangent, curvature and normal at ``t``.

    In the plane the curvature is signed and ``normal`` is the left normal
    (tangent rotated by +90 degrees).  In space ``normal`` is the principal
    normal, NaN where the curvature vanishes.
    """
    t = np.asarray(t, float)
    p, d1, d2 = curve.evaluate_many(t, (0, 1, 2))
    sp = np.linalg.norm(d1, axis=-1)
    if np.any(sp <= 1e-12 * max(curve.diameter, 1e-300)):
        raise DegenerateCurveError("non-regular point: |K'| below tolerance")
    T = d1 / sp[..., None]
    kappa = _curvature(d1, d2)
    if curve.dimension == 2:
        N = np.stack([-T[..., 1], T[..., 0]], axis=-1)
    else:
        acc = d2 - (d2 * T).sum(-1, keepdims=True) * T
        na = np.linalg.norm(acc, axis=-1, keepdims=True)
        with np.errstate(invalid="ignore", divide="ignore"):
            N = np.where(na > 1e-12 * sp[..., None] ** 2, acc / na, np.nan)
    return Frame(p, T, kappa, N, sp)


@dataclass(frozen=True)
class ChordData:
    p: np.ndarray
    q: np.ndarray
    r: np.ndarray
    theta_p: np.ndarray
    theta_q: np.ndarray
    cos_tau: np.ndarray
    sin_tau: np.ndarray
    degenerate: np.ndarray  # dihedral undefined (chord parallel to a tangent)


def chord_data(curve: ClosedCurve, s, t, *, other: ClosedCurve | None = None) -> ChordData:
    """Chord angles between ``p = K(s)`` and ``q = K(t)`` (or ``q`` on ``other``).

    Plane: ``theta_p`` is the oriented angle from the tangent at p to q - p,
    likewise ``theta_q``; ``cos_tau = sign(sin theta_p sin theta_q)``.
    Space: unsigned angles in [0, pi] and the dihedral angle between the
    planes with normals ``n_p = T_p x (q-p)``, ``n_q = T_q x (q-p)``.  The sign
    of ``sin_tau`` is taken about the axis ``p - q`` so that the writhe
    integral of ``sin_tau`` reproduces the signed-crossing writhe.
    """
    K2 = curve if other is None else other
    fp = eval_frame(curve, s)
    fq = eval_frame(K2, t)
    d = fq.point - fp.point
    r = np.linalg.norm(d, axis=-1)
    scale = max(curve.diameter, K2.diameter)
    if np.any(r <= 1e-13 * scale):
        raise DegenerateCurveError("near-diagonal chord: |q - p| below tolerance")
    Tp, Tq = fp.tangent, fq.tangent
    if curve.dimension == 2:
        sp_, cp_ = _cross2(Tp, d), (Tp * d).sum(-1)
        sq_, cq_ = _cross2(Tq, d), (Tq * d).sum(-1)
        th_p = np.arctan2(sp_, cp_)
        th_q = np.arctan2(sq_, cq_)
        cos_tau = np.sign(sp_ * sq_)
        sin_tau = np.zeros_like(r)
        degen = (sp_ == 0) | (sq_ == 0)
        return ChordData(fp.point, fq.point, r, th_p, th_q, cos_tau, sin_tau, degen)
    cp_ = np.clip((Tp * d).sum(-1) / r, -1.0, 1.0)
    cq_ = np.clip((Tq * d).sum(-1) / r, -1.0, 1.0)
    n_p = np.cross(Tp, d)
    n_q = np.cross(Tq, d)
    a_p = np.linalg.norm(n_p, axis=-1)
    a_q = np.linalg.norm(n_q, axis=-1)
    den = a_p * a_q
    degen = den <= 1e-14 * r**2
    with np.errstate(invalid="ignore", divide="ignore"):
        cos_tau = np.where(degen, 0.0, (n_p * n_q).sum(-1) / den)
        sin_tau = np.where(degen, 0.0, -(np.cross(n_p, n_q) * d).sum(-1) / (den * r))
    return ChordData(fp.point, fq.point, r, np.arccos(cp_), np.arccos(cq_), cos_tau, sin_tau, degen)


def parallel_curve3(curve: ClosedCurve, delta: float, *, tol: float = 1e-9) -> ClosedCurve:
    """Offset ``K + delta * n`` along the principal normal, refit to Fourier form."""
    if curve.dimension != 3:
        curve = curve.embed3()
    n = curve.default_n(1024)
    fr = eval_frame(curve, uniform_grid(n))
    kmin = float(np.min(fr.curvature))
    # a sign flip of the normal between nodes means kappa passes through 0
    flips = np.all(np.isfinite(fr.normal)) and np.any((fr.normal * np.roll(fr.normal, -1, axis=0)).sum(-1) < 0)
    if not np.all(np.isfinite(fr.normal)) or flips or kmin <= 1e-8 / curve.diameter:
        raise OffsetError(
            "principal normal undefined: curvature vanishes somewhere on K; "
            "move the curve out of this situation by a preliminary inversion "
            "centered outside its curvature tube",
            0.0,
        )
    bound = 1.0 / float(np.max(fr.curvature))
    if delta >= bound:
        raise OffsetError(f"offset {delta} exceeds the radius-of-curvature bound {bound:.6g}", bound)

    def f(t):
        fr_ = eval_frame(curve, t)
        return fr_.point + delta * fr_.normal

    out = ClosedCurve.from_function(f, tol=tol, scale=curve.diameter)
    return out


# ---------------------------------------------------------------------------
# planar domains


def winding_number(curve: ClosedCurve, w, n: int | None = None) -> np.ndarray:
    """Winding number of a planar curve around points ``w`` (polyline angle sum)."""
    w = np.atleast_2d(np.asarray(w, float))
    n = n or curve.default_n(1024)
    pts = curve.sample(n)
    out = np.empty(w.shape[0])
    for i in range(0, w.shape[0], 2048):
        rel = pts[None, :, :] - w[i : i + 2048, None, :]
        ang = np.arctan2(rel[..., 1], rel[..., 0])
        dang = np.diff(np.concatenate([ang, ang[:, :1]], axis=1), axis=1)
        dang = (dang + np.pi) % TWO_PI - np.pi
        out[i : i + 2048] = dang.sum(1) / TWO_PI
    return np.rint(out)


def _kdtree(curve: ClosedCurve, n: int):
    key = ("kdtree", n)
    tree = curve._cache.get(key)
    if tree is None:
        tree = cKDTree(curve.sample(n))
        curve._cache[key] = tree
    return tree


def closest_point(curve: ClosedCurve, x, n: int | None = None):
    """Parameter and distance of the nearest point of ``curve`` to each ``x``."""
    x = np.atleast_2d(np.asarray(x, float))
    n = n or curve.default_n(1024)
    _, idx = _kdtree(curve, n).query(x)
    t = uniform_grid(n)[idx]
    h = TWO_PI / n
    for _ in range(8):
        p = curve.evaluate(t)
        d1 = curve.evaluate(t, 1)
        d2_ = curve.evaluate(t, 2)
        r = p - x
        g = (r * d1).sum(-1)
        gp = (d1 * d1).sum(-1) + (r * d2_).sum(-1)
        step = np.where(gp > 0, g / np.where(gp > 0, gp, 1.0), 0.0)
        t = t - np.clip(step, -h, h)
    dist = np.linalg.norm(curve.evaluate(t) - x, axis=-1)
    return t % TWO_PI, dist


class PlanarDomain:
    """Compact planar domain given by its boundary curves.

    Every boundary is stored oriented with the domain on its left, so outer
    boundaries run counterclockwise and holes clockwise.

    Parameters
    ----------
    outer : ClosedCurve
        Outer boundary of a connected domain (orientation is normalized).
    holes : sequence of ClosedCurve
        Hole boundaries inside ``outer``.
    """

    def __init__(self, outer: ClosedCurve, holes: Sequence[ClosedCurve] = (), *, validate=True):
        self.components: list[tuple[ClosedCurve, list[ClosedCurve]]] = []
        self._add_component(outer, holes)
        if validate:
            self._validate()

    def _add_component(self, outer, holes):
        if outer.dimension != 2 or any(h.dimension != 2 for h in holes):
            raise GeometryError("planar domains need planar boundary curves")
        if outer.signed_area() < 0:
            outer = outer.reversed()
        hs = [h.reversed() if h.signed_area() > 0 else h for h in holes]
        self.components.append((outer, hs))

    @classmethod
    def from_components(cls, comps, validate=True) -> "PlanarDomain":
        comps = list(comps)
        dom = cls(comps[0][0], comps[0][1], validate=False)
        for o, hs in comps[1:]:
            dom._add_component(o, hs)
        if validate:
            dom._validate()
        return dom

    @classmethod
    def from_boundaries(cls, curves: Sequence[ClosedCurve], validate=True) -> "PlanarDomain":
        """Domain from boundaries already oriented with the domain on the left."""
        outers = [c for c in curves if c.signed_area() > 0]
        holes = [c for c in curves if c.signed_area() < 0]
        if not outers:
            raise GeometryError("no positively oriented boundary: domain is unbounded")
        groups: list[list] = [[] for _ in outers]
        areas = [o.signed_area() for o in outers]
        for h in holes:
            probe = h.evaluate(np.array([0.0]))
            owners = [i for i, o in enumerate(outers) if winding_number(o, probe)[0] == 1]
            if not owners:
                raise GeometryError("hole boundary is not inside any outer boundary")
            groups[min(owners, key=lambda i: areas[i])].append(h)
        return cls.from_components(list(zip(outers, groups)), validate=validate)

    def disjoint_union(self, other: "PlanarDomain") -> "PlanarDomain":
        return PlanarDomain.from_components(self.components + other.components)

    # -- structure -------------------------------------------------------
    @property
    def outer(self) -> ClosedCurve:
        return self.components[0][0]

    @property
    def holes(self) -> list[ClosedCurve]:
        return [h for _, hs in self.components for h in hs]

    @property
    def boundaries(self) -> list[ClosedCurve]:
        out = []
        for o, hs in self.components:
            out.append(o)
            out.extend(hs)
        return out

    @property
    def euler_characteristic(self) -> int:
        return len(self.components) - len(self.holes)

    @property
    def is_simply_connected(self) -> bool:
        return len(self.components) == 1 and not self.holes

    @cached_property
    def area(self) -> float:
        return float(sum(c.signed_area() for c in self.boundaries))

    @cached_property
    def diameter(self) -> float:
        return max(o.diameter for o, _ in self.components) if len(self.components) == 1 else float(
            _set_diameter([c.sample(512) for c in self.boundaries])
        )

    @cached_property
    def length(self) -> float:
        return float(sum(c.length for c in self.boundaries))

    def bounding_box(self):
        pts = np.concatenate([c.sample(1024) for c in self.boundaries])
        return pts.min(axis=0), pts.max(axis=0)

    def signed_distance(self, w) -> np.ndarray:
        """Distance to the boundary, positive inside the domain.

        The side is read off at the nearest boundary point, where the left
        normal points into the domain.
        """
        w = np.atleast_2d(np.asarray(w, float))
        best = np.full(w.shape[0], np.inf)
        side = np.zeros(w.shape[0], dtype=bool)
        for c in self.boundaries:
            t, dist = closest_point(c, w)
            fr = eval_frame(c, t)
            inner = ((w - fr.point) * fr.normal).sum(-1) > 0
            upd = dist < best
            best = np.where(upd, dist, best)
            side = np.where(upd, inner, side)
        return np.where(side, best, -best)

    def contains(self, w) -> np.ndarray:
        """Boolean mask of points strictly inside the domain."""
        return self.signed_distance(w) > 0

    def distance_to_boundary(self, w) -> np.ndarray:
        return np.abs(self.signed_distance(w))

    def min_boundary_separation(self) -> float:
        bs = self.boundaries
        best = np.inf
        for i in range(len(bs)):
            for j in range(i + 1, len(bs)):
                best = min(best, _curve_distance(bs[i], bs[j]))
        return best

    def max_inward_curvature(self) -> float:
        """Largest curvature bending toward the domain (limits inward offsets)."""
        k = 0.0
        for c in self.boundaries:
            n = c.default_n(1024)
            k = max(k, float(np.max(_curvature(c.sample(n, 1), c.sample(n, 2)))))
        return k

    def offset_bound(self) -> float:
        """Largest inward offset allowed by curvature and component separation."""
        kmax = self.max_inward_curvature()
        b = 1.0 / kmax if kmax > 0 else np.inf
        return float(min(b, 0.5 * self.min_boundary_separation()))

    def _validate(self):
        bs = self.boundaries
        scale = self.diameter
        if len(bs) > 1 and self.min_boundary_separation() <= 1e-9 * scale:
            raise GeometryError("boundary curves touch or intersect")
        for o, hs in self.components:
            for h in hs:
                if winding_number(o, h.evaluate(np.array([0.0])))[0] != 1:
                    raise GeometryError("hole is not inside its outer boundary")
        for i, (o, _) in enumerate(self.components):
            probe = o.evaluate(np.array([0.0]))
            for j, (o2, hs2) in enumerate(self.components):
                if i == j:
                    continue
                inside = winding_number(o2, probe)[0] == 1 and not any(
                    winding_number(h, probe)[0] != 0 for h in hs2
                )
                if inside:
                    raise GeometryError("components overlap")

    # -- serialization ---------------------------------------------------
    def to_dict(self) -> dict:
        if len(self.components) == 1:
            return {"outer": self.outer.to_dict(), "holes": [h.to_dict() for h in self.holes]}
        return {
            "components": [
                {"outer": o.to_dict(), "holes": [h.to_dict() for h in hs]} for o, hs in self.components
            ]
        }

    @classmethod
    def from_dict(cls, data: dict) -> "PlanarDomain":
        try:
            if "components" in data:
                comps = [
                    (ClosedCurve.from_dict(c["outer"]), [ClosedCurve.from_dict(h) for h in c.get("holes", [])])
                    for c in data["components"]
                ]
                return cls.from_components(comps)
            outer = ClosedCurve.from_dict(data["outer"])
            holes = [ClosedCurve.from_dict(h) for h in data.get("holes", [])]
        except (KeyError, TypeError) as exc:
            raise SchemaError(f"malformed domain record: {exc}") from exc
        return cls(outer, holes)

    # -- library ---------------------------------------------------------
    @classmethod
    def disk(cls, radius: float = 1.0, center=(0.0, 0.0)):
        return cls(ClosedCurve.circle(radius, center))

    @classmethod
    def annulus(cls, r_in: float = 1.0, r_out: float = 4.0, center=(0.0, 0.0)):
        return cls(ClosedCurve.circle(r_out, center), [ClosedCurve.circle(r_in, center)])


def _set_diameter(point_sets):
    pts = np.concatenate(point_sets)
    pts = pts[:: max(1, pts.shape[0] // 1500)]
    diff = pts[:, None, :] - pts[None, :, :]
    return np.sqrt((diff**2).sum(-1).max())


def _curve_distance(c1: ClosedCurve, c2: ClosedCurve) -> float:
    p1 = c1.sample(c1.default_n(512))
    p2 = c2.sample(c2.default_n(512))
    best = np.inf
    for i in range(0, p1.shape[0], 512):
        d = np.linalg.norm(p1[i : i + 512, None, :] - p2[None, :, :], axis=-1)
        best = min(best, float(d.min()))
    # polish with projections from the coarse minimizers
    _, dist = closest_point(c2, p1)
    return float(min(best, dist.min()))


def parallel_curve2(domain: PlanarDomain, delta: float, *, tol: float = 1e-9) -> list[ClosedCurve]:
    """Boundary of ``{w in domain : d(w, K) >= delta}`` as refit Fourier curves.

    Each boundary moves a distance ``delta`` along its left normal, which
    points into the domain for both outer boundaries and holes.
    """
    bound = domain.offset_bound()
    if delta >= bound:
        raise OffsetError(f"offset {delta} collapses the domain; maximal feasible offset is {bound:.6g}", bound)
    out = []
    for c in domain.boundaries:

        def f(t, c=c):
            fr = eval_frame(c, t)
            return fr.point + delta * fr.normal

        off = ClosedCurve.from_function(f, tol=tol, scale=c.diameter)
        # non-local check: the offset must stay delta away from every boundary
        pts = off.sample(off.default_n(512))
        if domain.distance_to_boundary(pts).min() < delta * (1 - 1e-6):
            raise OffsetError("offset curve is not embedded (a neck narrower than 2*delta)", bound)
        out.append(off)
    return out
