"""Hot inner loops: plane crossings, ball parameter lengths, NT classification.

The compiled extension ``_ckernels`` is used when it is importable; the
numpy module ``_pykernels`` is the fallback.  Set the environment variable
``MOEBIUS_ENERGY_PURE_PYTHON=1`` to force the fallback.  Both backends
share these wrappers, so curve preprocessing and tolerances are identical.
"""
from __future__ import annotations

import os
from contextlib import contextmanager

import numpy as np

from . import _pykernels

try:
    if os.environ.get("MOEBIUS_ENERGY_PURE_PYTHON", "") not in ("", "0"):
        raise ImportError("pure-python backend requested")
    from . import _ckernels  # type: ignore[attr-defined]

    BACKEND = "cython"
except ImportError:
    _ckernels = None
    BACKEND = "python"

_BACKENDS = {"python": _pykernels}
if _ckernels is not None:
    _BACKENDS["cython"] = _ckernels


def available_backends() -> list[str]:
    return sorted(_BACKENDS)


@contextmanager
def use_backend(name: str):
    """Temporarily route every kernel call through backend ``name``."""
    global BACKEND
    _impl(name)
    old, BACKEND = BACKEND, name
    try:
        yield
    finally:
        BACKEND = old


def _impl(backend: str | None):
    name = backend or BACKEND
    try:
        return _BACKENDS[name]
    except KeyError:
        raise ValueError(f"backend {name!r} not available (have {available_backends()})") from None


def curve_arrays(curve):
    """Contiguous 3D coefficient arrays, the root-finding grid and its scales."""
    hit = curve._cache.get("kernel_arrays")
    if hit is not None:
        return hit
    c3 = curve if curve.dimension == 3 else curve.embed3()
    a0 = np.ascontiguousarray(c3.a0, dtype=float)
    A = np.ascontiguousarray(c3.a, dtype=float)
    B = np.ascontiguousarray(c3.b, dtype=float)
    # 8x oversampling of the highest mode
    N = int(2 ** np.ceil(np.log2(max(64, 8 * c3.modes))))
    P = np.ascontiguousarray(c3.sample(N))
    dense = max(256, 4 * N)
    d1max = float(np.linalg.norm(c3.sample(dense, 1), axis=1).max())
    d2max = float(np.linalg.norm(c3.sample(dense, 2), axis=1).max())
    out = dict(a0=a0, A=A, B=B, P=P, N=N, d1max=d1max, d2max=d2max, diam=c3.diameter)
    curve._cache["kernel_arrays"] = out
    return out


def plane_crossings(curve, C, U, R=None, W=None, *, mode: str = "disk", backend: str | None = None):
    """Crossings of ``curve`` through disks (``mode='disk'``) or half-planes.

    Parameters
    ----------
    C, U : (n, 3) arrays
        Plane points (disk centers) and unit normals.
    R : (n,) array
        Disk radii (disk mode).
    W : (n, 3) array
        In-plane unit vectors pointing into the half-plane (half-plane mode).

    Returns
    -------
    lam, hits, status : arrays
        Signed crossing count (sign of ``K'.U``), crossing count, and 1 for
        samples with a near-tangent crossing.
    """
    ka = curve_arrays(curve)
    C = np.ascontiguousarray(C, dtype=float)
    U = np.ascontiguousarray(U, dtype=float)
    n = C.shape[0]
    R = np.ascontiguousarray(np.zeros(n) if R is None else R, dtype=float)
    W = np.ascontiguousarray(np.zeros((n, 3)) if W is None else W, dtype=float)
    h = 2 * np.pi / ka["N"]
    thr = h * h * ka["d2max"]
    return _impl(backend).plane_crossings(
        ka["a0"], ka["A"], ka["B"], ka["P"], C, U, R, W,
        0 if mode == "disk" else 1, thr, 1e-11 * ka["diam"], 1e-10,
    )


def ball_param_lengths(curve, C, R, *, backend: str | None = None):
    """Parameter measure (in ``[0, 2 pi]``) of ``{t : |K(t) - C_i| <= R_i}``.

    Returns ``(lengths, status)``.
    """
    ka = curve_arrays(curve)
    C = np.ascontiguousarray(C, dtype=float)
    R = np.ascontiguousarray(R, dtype=float)
    h = 2 * np.pi / ka["N"]
    reach = ka["diam"] + float(np.max(R, initial=0.0)) + float(np.max(np.abs(C), initial=0.0))
    thr = h * h * 2.0 * (ka["d1max"] ** 2 + reach * ka["d2max"])
    return _impl(backend).ball_param_lengths(
        ka["a0"], ka["A"], ka["B"], ka["P"], C, R, thr, 1e-11 * ka["diam"] ** 2
    )


def nt_status(boundary_points, component_ids, ncomp: int, W, Z, *, tol: float | None = None,
              backend: str | None = None):
    """0: some circle through ``W_i, Z_i`` avoids the boundary; 1: none does; 2: inconclusive."""
    Bp = np.ascontiguousarray(boundary_points, dtype=float)
    cid = np.ascontiguousarray(component_ids, dtype=np.int64)
    if tol is None:
        span = float(np.ptp(Bp, axis=0).max())
        tol = 1e-6 * span
    return _impl(backend).nt_status(
        Bp, cid, int(ncomp), np.ascontiguousarray(W, float), np.ascontiguousarray(Z, float), float(tol)
    )
