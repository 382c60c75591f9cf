"""Möbius transformations of the plane and of space, and invariance checks.

A :class:`MoebiusMap` is a composition of primitive maps (inversions in
spheres or circles, similarities and reflections), applied left to right.
Curves are pushed forward by sampling the image densely and refitting the
Fourier coefficients.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .curves import ClosedCurve, GeometryError, PlanarDomain, eval_frame

# ---------------------------------------------------------------------------
# primitives


@dataclass(frozen=True)
class Inversion:
    center: np.ndarray
    radius: float

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError("inversion radius must be positive")
        object.__setattr__(self, "center", np.asarray(self.center, float))

    reverses = True

    def __call__(self, x):
        d = np.asarray(x, float) - self.center
        r2 = (d * d).sum(-1, keepdims=True)
        return self.center + self.radius**2 * d / r2

    def jacobian(self, x):
        d = np.asarray(x, float) - self.center
        r2 = (d * d).sum(-1)
        u = d / np.sqrt(r2)[..., None]
        eye = np.eye(d.shape[-1])
        return (self.radius**2 / r2)[..., None, None] * (eye - 2 * u[..., :, None] * u[..., None, :])

    def inverse(self):
        return self

    def preimage_of_infinity(self):
        return self.center


@dataclass(frozen=True)
class Similarity:
    """``x -> scale * rotation @ x + shift`` with a proper rotation."""

    rotation: np.ndarray
    scale: float = 1.0
    shift: np.ndarray | None = None

    def __post_init__(self):
        Q = np.asarray(self.rotation, float)
        if not np.allclose(Q @ Q.T, np.eye(Q.shape[0]), atol=1e-10) or np.linalg.det(Q) < 0:
            raise ValueError("rotation must be orthogonal with determinant +1")
        if not self.scale > 0:
            raise ValueError("scale must be positive")
        object.__setattr__(self, "rotation", Q)
        sh = np.zeros(Q.shape[0]) if self.shift is None else np.asarray(self.shift, float)
        object.__setattr__(self, "shift", sh)

    reverses = False

    def __call__(self, x):
        return self.scale * np.asarray(x, float) @ self.rotation.T + self.shift

    def jacobian(self, x):
        x = np.asarray(x, float)
        return np.broadcast_to(self.scale * self.rotation, x.shape[:-1] + self.rotation.shape)

    def inverse(self):
        Qt = self.rotation.T
        return Similarity(Qt, 1.0 / self.scale, -(Qt @ self.shift) / self.scale)

    def preimage_of_infinity(self):
        return None


@dataclass(frozen=True)
class Reflection:
    """Reflection in the hyperplane through ``point`` with unit ``normal``."""

    point: np.ndarray
    normal: np.ndarray

    def __post_init__(self):
        n = np.asarray(self.normal, float)
        object.__setattr__(self, "normal", n / np.linalg.norm(n))
        object.__setattr__(self, "point", np.asarray(self.point, float))

    reverses = True

    def __call__(self, x):
        x = np.asarray(x, float)
        s = ((x - self.point) * self.normal).sum(-1, keepdims=True)
        return x - 2 * s * self.normal

    def jacobian(self, x):
        x = np.asarray(x, float)
        n = self.normal
        return np.broadcast_to(np.eye(n.size) - 2 * np.outer(n, n), x.shape[:-1] + (n.size, n.size))

    def inverse(self):
        return self

    def preimage_of_infinity(self):
        return None


# ---------------------------------------------------------------------------
# compositions


class MoebiusMap:
    """Composition ``f = p_k o ... o p_1`` of primitive maps (``p_1`` acts first)."""

    def __init__(self, primitives: Sequence = ()):
        self.primitives = list(primitives)
        dims = {self._dim(p) for p in self.primitives} - {None}
        if len(dims) > 1:
            raise ValueError("primitives of mixed dimension")
        self.dim = dims.pop() if dims else None

    @staticmethod
    def _dim(p):
        for name in ("center", "rotation", "normal"):
            v = getattr(p, name, None)
            if v is not None:
                return np.asarray(v).shape[0]
        return None

    def __repr__(self):
        return f"MoebiusMap({[type(p).__name__ for p in self.primitives]})"

    @classmethod
    def identity(cls):
        return cls([])

    @classmethod
    def inversion(cls, center, radius: float = 1.0):
        return cls([Inversion(center, radius)])

    @classmethod
    def similarity(cls, rotation, scale: float = 1.0, shift=None):
        return cls([Similarity(rotation, scale, shift)])

    @classmethod
    def reflection(cls, point, normal):
        return cls([Reflection(point, normal)])

    def then(self, other: "MoebiusMap") -> "MoebiusMap":
        """``other o self``."""
        return MoebiusMap(self.primitives + other.primitives)

    def __matmul__(self, other: "MoebiusMap") -> "MoebiusMap":
        """``self @ other`` is ``self o other``."""
        return other.then(self)

    def inverse(self) -> "MoebiusMap":
        return MoebiusMap([p.inverse() for p in reversed(self.primitives)])

    @property
    def orientation_preserving(self) -> bool:
        return sum(p.reverses for p in self.primitives) % 2 == 0

    def __call__(self, x):
        y = np.asarray(x, float)
        for p in self.primitives:
            y = p(y)
        return y

    def jacobian(self, x):
        y = np.asarray(x, float)
        J = None
        for p in self.primitives:
            Jp = p.jacobian(y)
            J = Jp if J is None else Jp @ J
            y = p(y)
        if J is None:
            return np.broadcast_to(np.eye(y.shape[-1]), y.shape[:-1] + (y.shape[-1],) * 2)
        return J

    def conformal_factor(self, x):
        """Scale factor ``|Df(x)|`` of the conformal differential."""
        J = self.jacobian(x)
        return np.sqrt(np.abs(np.linalg.det(J))) if J.shape[-1] == 2 else np.abs(np.linalg.det(J)) ** (1 / 3)

    def singular_points(self) -> list[np.ndarray]:
        """Finite points sent to infinity (inversion centers pulled back)."""
        out = []
        for k, p in enumerate(self.primitives):
            c = p.preimage_of_infinity()
            if c is None:
                continue
            pre = MoebiusMap(self.primitives[:k]).inverse()
            with np.errstate(divide="ignore", invalid="ignore"):
                x = pre(c)
            if np.all(np.isfinite(x)):
                out.append(np.asarray(x))
        return out


def _singular_distance(f: MoebiusMap, pts: np.ndarray) -> float:
    sing = f.singular_points()
    if not sing:
        return np.inf
    return float(min(np.linalg.norm(pts - s, axis=1).min() for s in sing))


def apply(f: MoebiusMap, curve: ClosedCurve, *, tol: float = 1e-9, min_gap: float = 1e-3) -> ClosedCurve:
    """Image of ``curve`` under ``f``, refit to Fourier modes.

    Raises
    ------
    GeometryError
        A singular point of ``f`` lies within ``min_gap * diameter`` of the
        curve, so the image would be unbounded or badly resolved.
    """
    if f.dim is not None and f.dim != curve.dimension:
        raise ValueError(f"map acts in dimension {f.dim}, curve lives in {curve.dimension}")
    if not f.primitives:
        return curve
    pts = curve.sample(curve.default_n(1024))
    gap = _singular_distance(f, pts)
    if gap <= min_gap * curve.diameter:
        raise GeometryError(f"singular point of the map within {gap:.3g} of the curve; image not closed")
    return ClosedCurve.from_function(lambda t: f(curve.evaluate(t)), tol=tol, min_modes=max(8, curve.modes))


def apply_domain(f: MoebiusMap, domain: PlanarDomain, **kw) -> PlanarDomain:
    """Image of a compact domain; requires the image to stay compact.

    Orientation-reversing maps reverse every boundary so the image domain
    stays on the left.
    """
    for s in f.singular_points():
        if domain.contains(np.asarray(s)[None, :])[0]:
            raise GeometryError("singular point inside the domain: image is unbounded")
    imgs = [apply(f, c, **kw) for c in domain.boundaries]
    if not f.orientation_preserving:
        imgs = [c.reversed() for c in imgs]
    return PlanarDomain.from_boundaries(imgs)


def image_circle(center, radius: float, normal, f: MoebiusMap):
    """Exact image ``(center, radius, normal)`` of a circle in space, via three image points.

    The normal follows the orientation of the image of the positively
    parametrized circle.
    """
    c = ClosedCurve.circle(radius, center=center, normal=normal)
    t = np.array([0.0, 2 * np.pi / 3, 4 * np.pi / 3])
    a, b, d = f(c.evaluate(t))
    ab, ad = b - a, d - a
    n = np.cross(ab, ad)
    nn = float(n @ n)
    if nn < 1e-24 * max(ab @ ab, ad @ ad) ** 2:
        raise GeometryError("image is a line")
    ctr = a + (np.cross(n, ab) * (ad @ ad) + np.cross(ad, n) * (ab @ ab)) / (2 * nn)
    return ctr, float(np.linalg.norm(a - ctr)), n / np.sqrt(nn)


# ---------------------------------------------------------------------------
# admissible random maps


def curvature_tube_distance(curve: ClosedCurve, x, n: int | None = None) -> np.ndarray:
    """Distance from points ``x`` to the union of the osculating circles of ``curve``.

    Where the curvature vanishes the osculating circle is the tangent line.
    """
    n = n or curve.default_n(512)
    t = np.linspace(0, 2 * np.pi, n, endpoint=False)
    fr = eval_frame(curve, t)
    P, T = fr.point, fr.tangent
    x = np.atleast_2d(np.asarray(x, float))
    dim = curve.dimension
    kappa = np.abs(fr.curvature)
    if dim == 2:
        N = np.stack([-T[:, 1], T[:, 0]], 1) * np.sign(fr.curvature + 0.0)[:, None]
    else:
        N = np.nan_to_num(fr.normal)
    out = np.full(x.shape[0], np.inf)
    for i in range(x.shape[0]):
        d = x[i] - P
        tt = (d * T).sum(-1)
        nn = (d * N).sum(-1)
        h2 = np.maximum((d * d).sum(-1) - tt * tt - nn * nn, 0.0)
        with np.errstate(divide="ignore", invalid="ignore"):
            rho = 1.0 / kappa
            rad = np.sqrt(tt * tt + (nn - rho) ** 2)
            dist_circ = np.sqrt((rad - rho) ** 2 + h2)
        dist_line = np.sqrt(nn * nn + h2)
        dist = np.where(kappa > 1e-12, dist_circ, dist_line)
        out[i] = float(np.nanmin(dist))
    return out


def safe_inversion_center(
    K: ClosedCurve,
    rng: np.random.Generator | int | None = None,
    *,
    margin: float = 0.05,
    budget: int = 1000,
    avoid: Callable[[np.ndarray], bool] | None = None,
):
    """Random inversion center away from the curvature tube of ``K`` and a radius.

    Centers are drawn uniformly from the bounding box enlarged by one
    diameter and accepted when their distance to every osculating circle
    exceeds ``margin * diameter``.  ``avoid(x) -> True`` rejects further
    points (e.g. the interior of a domain).

    Returns
    -------
    center, radius
    """
    rng = np.random.default_rng(rng)
    diam = K.diameter
    pts = K.sample(K.default_n(256))
    lo, hi = pts.min(0) - diam, pts.max(0) + diam
    for _ in range(budget):
        c = lo + (hi - lo) * rng.random(pts.shape[1])
        if avoid is not None and avoid(c):
            continue
        if np.linalg.norm(pts - c, axis=1).min() <= margin * diam:
            continue
        if curvature_tube_distance(K, c)[0] > margin * diam:
            return c, float(diam * rng.uniform(0.5, 2.0))
    raise GeometryError("no admissible inversion center found within the rejection budget")


def random_rotation(rng: np.random.Generator, dim: int) -> np.ndarray:
    if dim == 2:
        a = rng.uniform(0, 2 * np.pi)
        return np.array([[np.cos(a), -np.sin(a)], [np.sin(a), np.cos(a)]])
    q, r = np.linalg.qr(rng.standard_normal((3, 3)))
    q = q * np.sign(np.diag(r))
    if np.linalg.det(q) < 0:
        q[:, 0] = -q[:, 0]
    return q


def random_moebius(
    K: ClosedCurve,
    rng: np.random.Generator,
    *,
    orientation_preserving: bool = False,
    avoid: Callable[[np.ndarray], bool] | None = None,
) -> MoebiusMap:
    """Inversion at a safe center followed by a random similarity.

    With ``orientation_preserving`` a reflection through the inversion
    center is appended.
    """
    c, R = safe_inversion_center(K, rng, avoid=avoid)
    dim = K.dimension
    f = MoebiusMap.inversion(c, R)
    if orientation_preserving:
        v = rng.standard_normal(dim)
        f = f.then(MoebiusMap.reflection(c, v))
    scale = 1.0 / R * float(np.exp(rng.uniform(-0.5, 0.5)))
    return f.then(MoebiusMap.similarity(random_rotation(rng, dim), scale, rng.standard_normal(dim)))


# ---------------------------------------------------------------------------
# invariance harness


@dataclass
class InvarianceReport:
    functional: str
    base: float
    values: list[float] = field(default_factory=list)
    redraws: int = 0
    runtime_ms: float = 0.0

    @property
    def deviations(self) -> np.ndarray:
        return np.abs(np.asarray(self.values) - self.base)

    @property
    def max_deviation(self) -> float:
        return float(self.deviations.max()) if self.values else 0.0

    def passes(self, rel: float = 1e-3) -> bool:
        return self.max_deviation < rel * (1 + abs(self.base))

    def to_dict(self) -> dict:
        return {
            "functional": self.functional,
            "base": self.base,
            "values": list(map(float, self.values)),
            "max_deviation": self.max_deviation,
            "redraws": self.redraws,
            "runtime_ms": self.runtime_ms,
        }


def _functional(name: str):
    from . import planar, space

    if name == "planar-E":
        return lambda obj: planar.curve_energy(obj.boundaries if isinstance(obj, PlanarDomain) else obj)
    if name == "domain-E":
        return lambda obj: planar.domain_energy(obj).value
    if name == "space-E":
        return lambda obj: space.space_energy(obj).value
    if name == "writhe":
        return lambda obj: space.writhe(obj)
    if name == "mutual":
        return lambda obj: space.mutual_energy_space(*obj).value
    raise ValueError(f"unknown functional {name!r}")


FUNCTIONALS = ("planar-E", "domain-E", "space-E", "writhe", "mutual")


def invariance_suite(functional: str, obj, trials: int = 20, seed: int = 0, *, maps: str = "inversion",
                     max_redraws: int = 100) -> InvarianceReport:
    """Evaluate a functional on ``obj`` and on its images under random maps.

    Parameters
    ----------
    functional : str
        One of ``FUNCTIONALS``.
    obj : ClosedCurve, PlanarDomain or pair of curves
    maps : {"inversion", "similarity"}
        Random admissible inversions (orientation preserving for the writhe)
        or pure similarities with scale 10.
    """
    t0 = time.perf_counter()
    fn = _functional(functional)
    rng = np.random.default_rng(seed)
    rep = InvarianceReport(functional, float(fn(obj)))
    if isinstance(obj, PlanarDomain):
        ref = obj.outer
    elif isinstance(obj, (tuple, list)):
        ref = ClosedCurve.from_samples(np.concatenate([c.sample(512) for c in obj]), modes=4, check=False)
    else:
        ref = obj
    curves = list(obj) if isinstance(obj, (tuple, list)) else None
    avoid = None
    if isinstance(obj, PlanarDomain) and functional == "domain-E":
        # compact domains must stay compact
        avoid = lambda x: bool(obj.contains(x[None, :])[0])  # noqa: E731
    while len(rep.values) < trials:
        if maps == "similarity":
            dim = ref.dimension
            f = MoebiusMap.similarity(random_rotation(rng, dim), 10.0, rng.standard_normal(dim))
        else:
            f = random_moebius(ref, rng, orientation_preserving=functional == "writhe", avoid=avoid)
        try:
            if isinstance(obj, PlanarDomain):
                img = apply_domain(f, obj)
            elif curves is not None:
                img = tuple(apply(f, c) for c in curves)
                for c in curves:
                    if _singular_distance(f, c.sample(512)) <= 1e-3 * c.diameter:
                        raise GeometryError("singular point near a component")
            else:
                img = apply(f, obj)
        except GeometryError:
            rep.redraws += 1
            if rep.redraws > max_redraws:
                raise
            continue
        rep.values.append(float(fn(img)))
    rep.runtime_ms = 1e3 * (time.perf_counter() - t0)
    return rep


# ---------------------------------------------------------------------------
# conjugate circles


def conjugate_pair(rho: float | None = None, *, center=(5.0, 0.0, 0.0), radius: float = 1.0):
    """Images under the inversion at ``center`` of the unit xy-circle and of the z-axis.

    With ``rho`` the axis is replaced by the circle of radius ``rho`` in the
    xz-plane tangent to the axis at the origin, centered at ``(-rho, 0, 0)``;
    ``rho = None`` uses the exact image circle of the axis.
    """
    f = MoebiusMap.inversion(center, radius)
    k1 = image_circle((0, 0, 0), 1.0, (0, 0, 1), f)
    if rho is None:
        a, b, d = f(np.array([[0, 0, -1.0], [0, 0, 0.0], [0, 0, 1.0]]))
        # three image points of the axis, ordered along increasing z
        ab, ad = b - a, d - a
        n = np.cross(ab, ad)
        nn = float(n @ n)
        ctr = a + (np.cross(n, ab) * (ad @ ad) + np.cross(ad, n) * (ab @ ab)) / (2 * nn)
        k2 = (ctr, float(np.linalg.norm(a - ctr)), n / np.sqrt(nn))
    else:
        k2 = image_circle((-rho, 0, 0), rho, (0, 1, 0), f)
    return tuple(ClosedCurve.circle(r, center=c, normal=nrm) for c, r, nrm in (k1, k2))


@dataclass
class ConjugatePairResult:
    rhos: np.ndarray
    values: np.ndarray
    extrapolated: float
    exact: float


def conjugate_pair_energy(rhos: Sequence[float] = (8.0, 16.0, 32.0, 64.0, 128.0)) -> ConjugatePairResult:
    """Mutual energy of the conjugate pair by the auxiliary-circle limit.

    Values on the ``rho`` ladder are extrapolated to ``1/rho -> 0`` with a
    polynomial in ``1/rho``; the exact image of the axis is also evaluated.
    """
    from .space import mutual_energy_space

    rhos = np.asarray(rhos, float)
    vals = np.array([mutual_energy_space(*conjugate_pair(r)).value for r in rhos])
    deg = min(2, rhos.size - 1)
    coef = np.polyfit(1.0 / rhos, vals, deg)
    exact = mutual_energy_space(*conjugate_pair(None)).value
    return ConjugatePairResult(rhos, vals, float(coef[-1]), float(exact))
