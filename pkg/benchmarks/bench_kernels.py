"""Compiled vs numpy kernels: timings and agreement.

Usage::

    python benchmarks/bench_kernels.py [--n 20000] [--repeat 3] [--json out.json]

Each kernel runs on identical inputs under both backends; the script
reports the best-of-``repeat`` wall time, the speedup and the largest
difference between the two outputs.
"""
from __future__ import annotations

import argparse
import json
import time

import numpy as np

from moebius_energy import kernels
from moebius_energy.curves import ClosedCurve, PlanarDomain
from moebius_energy.integral_geometry import CircleSampler, batch_generator, mc_energy_circles


def _best(fn, repeat):
    best, out = np.inf, None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def _maxdiff(a, b) -> float:
    a = a if isinstance(a, tuple) else (a,)
    b = b if isinstance(b, tuple) else (b,)
    return max(float(np.max(np.abs(np.asarray(x, float) - np.asarray(y, float)), initial=0.0)) for x, y in zip(a, b))


def cases(n: int):
    K = ClosedCurve.trefoil()
    rng = batch_generator(0, 0)
    c, r, u, _ = CircleSampler(K, 1e-2, 10.0, "log").draw(rng, n)
    dom = PlanarDomain(ClosedCurve.star([(3, 0.3, 0.0)]))
    B = np.concatenate([b.sample(1024) for b in dom.boundaries])
    cid = np.zeros(B.shape[0], dtype=np.int64)
    W = rng.uniform(-1, 1, (n // 10, 2))
    Z = rng.uniform(-1, 1, (n // 10, 2))
    return {
        "plane_crossings": lambda be: kernels.plane_crossings(K, c, u, r, backend=be),
        "ball_param_lengths": lambda be: kernels.ball_param_lengths(K, c, r, backend=be),
        "nt_status": lambda be: kernels.nt_status(B, cid, 1, W, Z, backend=be),
    }


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.split("\n\n")[0])
    ap.add_argument("--n", type=int, default=20000, help="samples per kernel call")
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--mc", type=int, default=20000, help="samples for the end-to-end estimator")
    ap.add_argument("--json", default=None)
    a = ap.parse_args(argv)

    backends = kernels.available_backends()
    if "cython" not in backends:
        print("compiled extension not built; only the numpy backend is available")
    rows = []
    for name, fn in cases(a.n).items():
        res = {be: _best(lambda: fn(be), a.repeat) for be in backends}
        row = {"kernel": name, **{f"{be}_s": res[be][0] for be in backends}}
        if len(backends) == 2:
            row["speedup"] = res["python"][0] / res["cython"][0]
            row["max_diff"] = _maxdiff(res["python"][1], res["cython"][1])
        rows.append(row)

    K = ClosedCurve.trefoil()
    e2e = {}
    for be in backends:
        with kernels.use_backend(be):
            t, est = _best(lambda: mc_energy_circles(K, a.mc, seed=1), 1)
        e2e[be] = (t, est.mean)
    row = {"kernel": f"mc_energy_circles({a.mc})", **{f"{be}_s": e2e[be][0] for be in backends}}
    if len(backends) == 2:
        row["speedup"] = e2e["python"][0] / e2e["cython"][0]
        row["max_diff"] = abs(e2e["python"][1] - e2e["cython"][1])
    rows.append(row)

    w = max(len(r["kernel"]) for r in rows)
    head = f"{'kernel':<{w}}  " + "  ".join(f"{be + ' [s]':>12}" for be in backends)
    if len(backends) == 2:
        head += f"  {'speedup':>8}  {'max diff':>9}"
    print(head)
    for r in rows:
        line = f"{r['kernel']:<{w}}  " + "  ".join(f"{r[be + '_s']:12.4f}" for be in backends)
        if "speedup" in r:
            line += f"  {r['speedup']:8.1f}  {r['max_diff']:9.1e}"
        print(line)
    if a.json:
        with open(a.json, "w") as fh:
            json.dump(rows, fh, indent=1)


if __name__ == "__main__":
    main()
