"""Extrapolation of cutoff families ``F(eps)`` to ``eps -> 0``.

A family is fitted by least squares to ``sum_i c_i eps**e_i`` over a small
set of integer exponents.  Divergent coefficients can be pinned (the caller
already subtracted the prescribed counterterm) or left free, in which case
the fit recovers them and they can be compared with their expected values.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np


class ExtrapolationError(RuntimeError):
    """The fit is too ill-conditioned or the ladder too short to trust."""


@dataclass(frozen=True)
class DivergenceModel:
    """Basis of powers of eps for the fit.

    Attributes
    ----------
    terms : tuple of int
        Exponents of the basis functions; must contain 0.
    known_coefficients : mapping
        Exponent -> value for terms whose coefficient is prescribed.  Their
        contribution is subtracted from the samples before fitting.
    """

    terms: tuple[int, ...] = (0, 1, 2)
    known_coefficients: Mapping[int, float] = field(default_factory=dict)

    def __post_init__(self):
        if 0 not in self.terms:
            raise ValueError("the constant term must be part of the model")
        if 0 in self.known_coefficients:
            raise ValueError("the constant term cannot be pinned")

    @property
    def free_terms(self) -> tuple[int, ...]:
        return tuple(e for e in sorted(set(self.terms)) if e not in self.known_coefficients)


@dataclass
class RenormResult:
    value: float
    fit_residual: float
    ladder: list[tuple[float, float]]
    error_estimate: float
    coefficients: dict[int, float]
    condition: float
    divergent_residual: dict[int, float] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "value": self.value,
            "residual": self.fit_residual,
            "error_estimate": self.error_estimate,
            "ladder": [[e, v] for e, v in self.ladder],
            "coefficients": {str(k): v for k, v in self.coefficients.items()},
            "condition": self.condition,
            "divergent_residual": {str(k): v for k, v in self.divergent_residual.items()},
        }


def geometric_ladder(largest: float, rungs: int = 6, ratio: float = 0.5) -> np.ndarray:
    """Decreasing cutoffs ``largest * ratio**j``."""
    return largest * ratio ** np.arange(rungs)


def _lstsq(eps, vals, exps, max_cond):
    # columns scaled to unit max so the condition number reflects the geometry
    A = eps[:, None] ** np.asarray(exps, float)[None, :]
    scale = np.abs(A).max(axis=0)
    As = A / scale
    cond = float(np.linalg.cond(As))
    if not np.isfinite(cond) or cond > max_cond:
        raise ExtrapolationError(f"extrapolation unreliable: condition number {cond:.3e}")
    coef, *_ = np.linalg.lstsq(As, vals, rcond=None)
    coef = coef / scale
    return coef, A @ coef, cond


def extrapolate(
    samples: Iterable[tuple[float, float]],
    model: DivergenceModel | None = None,
    *,
    max_cond: float = 1e10,
) -> RenormResult:
    """Fit ``value ~ sum c_e eps**e`` and return the constant coefficient.

    Parameters
    ----------
    samples : iterable of (eps, value)
        At least four samples spanning a factor of 8 in ``eps``.
    model : DivergenceModel
        Exponents and pinned coefficients.

    Returns
    -------
    RenormResult
        ``error_estimate`` is the change of the value when the smallest
        ``eps`` is dropped from the fit.
    """
    model = model or DivergenceModel()
    pts = sorted(((float(e), float(v)) for e, v in samples), key=lambda p: -p[0])
    if len(pts) < 4:
        raise ExtrapolationError("need at least 4 samples")
    eps = np.array([p[0] for p in pts])
    vals = np.array([p[1] for p in pts])
    if np.any(eps <= 0) or np.any(np.diff(eps) >= 0):
        raise ExtrapolationError("ladder must be positive and strictly decreasing")
    if eps[0] / eps[-1] < 8.0 * (1 - 1e-12):
        raise ExtrapolationError("ladder must span at least a factor of 8")
    pinned = dict(model.known_coefficients)
    work = vals - sum(c * eps**e for e, c in pinned.items())
    free = model.free_terms
    if len(free) >= len(eps):
        raise ExtrapolationError("more free terms than samples")
    coef, fit, cond = _lstsq(eps, work, free, max_cond)
    i0 = free.index(0)
    value = float(coef[i0])
    denom = np.maximum(np.abs(vals), 1e-300)
    resid = float(np.max(np.abs(fit - work) / denom))
    if len(free) < len(eps) - 1:
        c2, _, _ = _lstsq(eps[:-1], work[:-1], free, max_cond)
        err = abs(float(c2[i0]) - value)
    else:
        err = float("nan")
    coeffs = {e: float(c) for e, c in zip(free, coef)}
    coeffs.update({e: float(c) for e, c in pinned.items()})
    div_res = {}
    if pinned:
        # refit with the pinned exponents freed: their leftover coefficient should vanish
        allx = tuple(sorted(set(free) | set(pinned)))
        if len(allx) < len(eps):
            try:
                c3, _, _ = _lstsq(eps, work, allx, max_cond)
                div_res = {e: float(c3[allx.index(e)]) for e in pinned}
            except ExtrapolationError:
                div_res = {}
    return RenormResult(
        value=value,
        fit_residual=resid,
        ladder=[(float(e), float(v)) for e, v in zip(eps, vals)],
        error_estimate=err,
        coefficients=coeffs,
        condition=cond,
        divergent_residual=div_res,
    )


def fit_coefficients(eps: Sequence[float], vals: Sequence[float], exps: Sequence[int]) -> dict[int, float]:
    """Plain least-squares coefficients (diagnostic mode)."""
    e = np.asarray(eps, float)
    coef, _, _ = _lstsq(e, np.asarray(vals, float), list(exps), 1e14)
    return {int(k): float(c) for k, c in zip(exps, coef)}
