"""The infinitesimal cross ratio ``omega = dw ^ dz / (w - z)^2`` on pairs of plane points.

Plane vectors are identified with complex numbers.  A tangent vector to
``C x C`` at ``(w, z)`` is a pair ``(dw, dz)``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np


def _c(v) -> complex:
    if isinstance(v, (complex, float, int, np.number)):
        return complex(v)
    a = np.asarray(v, float)
    return complex(a[0], a[1])


@dataclass(frozen=True)
class TangentPairFrame:
    """Base points ``w != z`` and two tangent vectors ``X = (dw[0], dz[0])``, ``Y = (dw[1], dz[1])``."""

    w: complex
    z: complex
    dw: tuple
    dz: tuple

    def __post_init__(self):
        w, z = _c(self.w), _c(self.z)
        if w == z:
            raise ValueError("base points coincide")
        object.__setattr__(self, "w", w)
        object.__setattr__(self, "z", z)
        object.__setattr__(self, "dw", tuple(_c(v) for v in self.dw))
        object.__setattr__(self, "dz", tuple(_c(v) for v in self.dz))

    @classmethod
    def split(cls, w, z, dw, dz) -> "TangentPairFrame":
        """Frame with ``X = (dw, 0)`` and ``Y = (0, dz)``."""
        return cls(w, z, (dw, 0), (0, dz))

    def pushforward(self, h: Callable, dh: Callable) -> "TangentPairFrame":
        """Image under ``(w, z) -> (h(w), h(z))`` for a holomorphic ``h`` with derivative ``dh``."""
        gw, gz = dh(self.w), dh(self.z)
        return TangentPairFrame(h(self.w), h(self.z), tuple(gw * v for v in self.dw), tuple(gz * v for v in self.dz))


def eval_omega_cr(frame: TangentPairFrame) -> complex:
    """``omega(X, Y) = (dw(X) dz(Y) - dw(Y) dz(X)) / (w - z)^2``."""
    (a1, a2), (b1, b2) = frame.dw, frame.dz
    return (a1 * b2 - a2 * b1) / (frame.w - frame.z) ** 2


def omega_matrix(w, z) -> np.ndarray:
    """Complex antisymmetric matrix of ``omega`` in the coordinate basis ``(u, v, x, y)``.

    ``w = u + iv`` and ``z = x + iy``.
    """
    w, z = _c(w), _c(z)
    basis = [(1, 0), (1j, 0), (0, 1), (0, 1j)]
    M = np.zeros((4, 4), dtype=complex)
    for i, (a1, b1) in enumerate(basis):
        for j, (a2, b2) in enumerate(basis):
            M[i, j] = (a1 * b2 - a2 * b1) / (w - z) ** 2
    return M


def wedge_square(alpha: np.ndarray) -> float:
    """``(alpha ^ alpha)(e_1, e_2, e_3, e_4)`` for a real 2-form given by its matrix."""
    a = alpha
    return float(2 * (a[0, 1] * a[2, 3] - a[0, 2] * a[1, 3] + a[0, 3] * a[1, 2]))


def squares_identity(w, z) -> tuple[float, float, float]:
    """``(Re^Re, Im^Im, 2/|z - w|^4)`` evaluated on the coordinate basis."""
    M = omega_matrix(w, z)
    r4 = abs(_c(z) - _c(w)) ** 4
    return wedge_square(M.real), wedge_square(M.imag), 2.0 / r4


def random_frames(rng: np.random.Generator, n: int, scale: float = 1.0):
    """``n`` random frames with well-separated base points."""
    out = []
    while len(out) < n:
        v = rng.standard_normal(10) * scale
        w, z = complex(v[0], v[1]), complex(v[2], v[3])
        if abs(w - z) < 0.1 * scale:
            continue
        out.append(TangentPairFrame(w, z, (complex(v[4], v[5]), complex(v[6], v[7])),
                                    (complex(v[8], v[9]), complex(*rng.standard_normal(2)))))
    return out
