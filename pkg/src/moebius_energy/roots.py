"""Vectorized root finding for band-limited periodic functions."""
from __future__ import annotations

import numpy as np


def bracketed_newton(f, df, lo, hi, *, tol: float = 1e-13, iters: int = 80):
    """Solve ``f(t) = 0`` on brackets ``[lo, hi]`` (arrays) with a sign change.

    Newton steps are taken when they stay inside the current bracket,
    bisection otherwise, so convergence is guaranteed.
    """
    lo = np.array(lo, dtype=float, copy=True)
    hi = np.array(hi, dtype=float, copy=True)
    if lo.size == 0:
        return lo
    flo = f(lo)
    fhi = f(hi)
    # a root sitting on a grid node can leave both ends with the same sign
    # after re-evaluation; the endpoint nearer to zero is then the root
    nobr = np.sign(flo) * np.sign(fhi) > 0
    end = np.where(np.abs(flo) <= np.abs(fhi), lo, hi)
    t = 0.5 * (lo + hi)
    for _ in range(iters):
        ft = f(t)
        dft = df(t)
        same = np.sign(ft) == np.sign(flo)
        lo = np.where(same, t, lo)
        flo = np.where(same, ft, flo)
        hi = np.where(same, hi, t)
        with np.errstate(divide="ignore", invalid="ignore"):
            tn = t - ft / dft
        inside = np.isfinite(tn) & (tn > lo) & (tn < hi)
        tn = np.where(inside, tn, 0.5 * (lo + hi))
        done = np.abs(tn - t) <= tol
        t = tn
        if np.all(done | (hi - lo <= tol)):
            break
    return np.where(nobr, end, t)


def sign_change_brackets(values: np.ndarray, grid: np.ndarray):
    """Brackets of sign changes of periodic samples along the last axis.

    Returns ``(row_index, lo, hi)`` where ``hi`` may exceed ``2*pi`` for the
    wrap-around cell.
    """
    v = values
    nxt = np.roll(v, -1, axis=-1)
    mask = (v == 0) | (np.sign(v) * np.sign(nxt) < 0)
    rows, cols = np.nonzero(mask.reshape(-1, v.shape[-1]))
    h = grid[1] - grid[0]
    lo = grid[cols]
    return rows, lo, lo + h
