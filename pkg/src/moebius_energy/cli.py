"""Command line front end.

Reads curve/domain JSON, runs the requested computations and writes JSON
(and optionally CSV) reports.

Exit codes
----------
0  success
1  computation failed (geometry or extrapolation error)
2  input schema or configuration error (JSON error record on stderr)
3  results written, but a numerical-reliability warning was raised
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import os
import sys
import time
import warnings
from pathlib import Path

import numpy as np

from . import corpus, integral_geometry, kernels, moebius, planar, space
from .curves import (
    ClosedCurve,
    GeometryError,
    PlanarDomain,
    ReliabilityWarning,
    SchemaError,
    eval_frame,
    uniform_grid,
)
from .renorm import ExtrapolationError

CSV_COLUMNS = ("route", "value", "err", "n", "runtime_ms")
PLANAR_ROUTES = ("sinsin", "coscos", "dots", "segment", "convex_chord", "nt", "domain", "tangent_circle")
SPACE_ROUTES = ("direct", "coscos", "dots", "parallel", "mc")
MC_ROUTES = {"nt", "mc"}


class ConfigError(ValueError):
    pass


def content_hash(data: bytes) -> str:
    """Git blob hash of the raw input bytes."""
    h = hashlib.sha1()
    h.update(b"blob %d\0" % len(data))
    h.update(data)
    return h.hexdigest()


def _load(path: str):
    try:
        raw = Path(path).read_bytes()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    try:
        rec = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: invalid JSON ({exc})") from exc
    return corpus.from_record(rec), content_hash(raw)


def _curves_of(obj) -> list[ClosedCurve]:
    if isinstance(obj, PlanarDomain):
        return obj.boundaries
    if isinstance(obj, ClosedCurve):
        return [obj]
    return list(obj)


def _positive(name, v):
    if v is not None and not v > 0:
        raise ConfigError(f"--{name} must be positive")


class Runner:
    def __init__(self, args):
        self.args = args
        self.timing = not args.no_timing

    def timed(self, fn):
        t0 = time.perf_counter()
        out = fn()
        ms = 1e3 * (time.perf_counter() - t0)
        return out, (round(ms, 3) if self.timing else 0.0)

    def row(self, route, quantity, value, err=float("nan"), n=0, ms=0.0, **extra):
        r = {"route": route, "quantity": quantity, "value": float(value), "err": float(err), "n": int(n),
             "runtime_ms": ms}
        r.update(extra)
        return r

    def need_seed(self):
        if self.args.seed is None:
            raise ConfigError("--seed is required for Monte Carlo computations")


# ---------------------------------------------------------------------------
# energy


def _is_convex(domain: PlanarDomain) -> bool:
    if len(domain.boundaries) != 1:
        return False
    c = domain.outer  # counterclockwise
    kappa = eval_frame(c, uniform_grid(c.default_n(512))).curvature
    return bool(np.all(kappa >= 0))


def _route_list(spec: str, allowed, seed):
    if spec == "all":
        return [r for r in allowed if r not in MC_ROUTES or seed is not None]
    routes = [r.strip() for r in spec.split(",") if r.strip()]
    bad = [r for r in routes if r not in allowed]
    if bad:
        raise ConfigError(f"unknown routes {bad}; choose from {list(allowed)}")
    return routes


def planar_rows(run: Runner, obj, routes) -> list[dict]:
    a = run.args
    dom = obj if isinstance(obj, PlanarDomain) else None
    curves = _curves_of(obj)
    if any(c.dimension != 2 for c in curves):
        raise ConfigError("planar energy needs planar curves")
    rows = []
    for r in routes:
        if r == "sinsin":
            v, ms = run.timed(lambda: planar.curve_energy(curves, a.grid))
            rows.append(run.row(r, "E(K)", v, 0.0, a.grid or 0, ms))
        elif r in ("coscos", "dots"):
            ce, ms = run.timed(lambda: planar.curve_energy_cutoff(curves, r, rungs=a.rungs or 6, largest=a.largest, n=a.grid))
            rows.append(run.row(r, "E(K)", ce.value, ce.curve.error_estimate, a.grid or 0, ms))
        elif r == "segment":
            v, ms = run.timed(lambda: planar.segment_energy(curves))
            rows.append(run.row(r, "E(K)", v, 0.0, 0, ms))
        elif r == "convex_chord":
            if dom is None or not _is_convex(dom):
                continue
            v, ms = run.timed(lambda: planar.convex_chord_energy(dom))
            rows.append(run.row(r, "E(K)", v, 0.0, 0, ms))
        elif r == "nt":
            run.need_seed()
            if dom is None:
                continue
            est, ms = run.timed(lambda: planar.nt_energy(dom, a.samples, a.seed))
            rows.append(run.row(r, "E(K)", est.value, est.stderr, est.n_samples, ms, discard_rate=est.discard_rate))
        elif r == "domain":
            if dom is None:
                continue
            res, ms = run.timed(lambda: planar.domain_energy(dom, rungs=a.rungs or 7, largest=a.largest))
            rows.append(run.row(r, "E(Omega)", res.value, res.error_estimate, 0, ms, renorm=res.to_dict()))
        elif r == "tangent_circle":
            if dom is None or not dom.is_simply_connected:
                continue
            tc, ms = run.timed(lambda: planar.tangent_circle_energy(dom, a.grid))
            rows.append(run.row(r, "E(Omega)", tc.value, 0.0, a.grid or 0, ms,
                                printed_constant_value=tc.value_printed_constant))
    return rows


def space_rows(run: Runner, obj, routes) -> list[dict]:
    a = run.args
    curves = _curves_of(obj)
    rows = []
    for r in routes:
        if r == "direct":
            rep = space.space_energy(curves, a.grid)
        elif r in ("coscos", "dots"):
            rep = space.space_energy_cutoff(curves, r, rungs=a.rungs or 6, largest=a.largest, n=a.grid)
        elif r == "parallel":
            if len(curves) != 1:
                raise ConfigError("the parallel route takes a single curve")
            rep = space.space_energy_parallel(curves[0], rungs=a.rungs or 6, largest=a.largest)
        else:
            run.need_seed()
            est, ms = run.timed(lambda: integral_geometry.mc_energy_circles(curves, a.samples, a.seed,
                                                                            threads=a.threads))
            rows.append(run.row("mc", "E(K)", est.mean, est.stderr, est.n_samples, ms, **est.to_dict()))
            continue
        d = rep.to_dict()
        d["runtime_ms"] = round(d["runtime_ms"], 3) if run.timing else 0.0
        rows.append(run.row(r, "E(K)", rep.value, rep.error if np.isfinite(rep.error) else 0.0, rep.n,
                            d["runtime_ms"], **{k: v for k, v in d.items() if k in ("renorm", "diagnostics")}))
    return rows


def cmd_energy(run: Runner, kind: str):
    a = run.args
    obj, h = _load(a.inputs[0])
    if kind == "planar":
        routes = _route_list(a.routes, PLANAR_ROUTES, a.seed)
        rows = planar_rows(run, obj, routes)
    else:
        routes = _route_list(a.routes, SPACE_ROUTES, a.seed)
        rows = space_rows(run, obj, routes)
    return {"input_hash": h, "routes": rows}


# ---------------------------------------------------------------------------
# other subcommands


def cmd_planar_potential(run: Runner):
    a = run.args
    dom, h = _load(a.inputs[0])
    if not isinstance(dom, PlanarDomain):
        raise ConfigError("potential needs a domain record")
    if not a.point:
        raise ConfigError("give at least one --point X Y")
    pts = np.array(a.point, float)
    vals, ms = run.timed(lambda: np.atleast_1d(planar.potential(pts, dom)))
    return {"input_hash": h, "points": pts.tolist(), "values": [float(v) for v in vals], "runtime_ms": ms}


def _pair(run: Runner):
    a = run.args
    if len(a.inputs) == 2:
        (o1, h1), (o2, h2) = _load(a.inputs[0]), _load(a.inputs[1])
        return o1, o2, [h1, h2]
    obj, h = _load(a.inputs[0])
    if isinstance(obj, list) and len(obj) == 2:
        return obj[0], obj[1], [h]
    raise ConfigError("mutual energy needs two inputs or one record with two curves")


def cmd_planar_mutual(run: Runner):
    o1, o2, hs = _pair(run)
    rows = []
    k1, k2 = _curves_of(o1), _curves_of(o2)
    for form in ("dots", "rere", "imim"):
        v, ms = run.timed(lambda: planar.mutual_energy_contour(k1, k2, form, run.args.grid))
        rows.append(run.row(f"contour_{form}", "E(O1,O2)", v, 0.0, run.args.grid or 0, ms))
    if isinstance(o1, PlanarDomain) and isinstance(o2, PlanarDomain):
        v, ms = run.timed(lambda: planar.mutual_energy_area(o1, o2))
        rows.append(run.row("area", "E(O1,O2)", v, 0.0, 0, ms))
    return {"input_hash": hs, "routes": rows}


def cmd_space_writhe(run: Runner):
    a = run.args
    obj, h = _load(a.inputs[0])
    curves = _curves_of(obj)
    if len(curves) != 1:
        raise ConfigError("writhe takes a single curve")
    K = curves[0]
    w, ms = run.timed(lambda: space.writhe(K, a.grid))
    rows = [run.row("quadrature", "W(K)", w, 0.0, a.grid or 0, ms)]
    if a.directions:
        run.need_seed()
        (m, se), ms = run.timed(lambda: space.writhe_projection(K, a.directions, a.seed))
        rows.append(run.row("projection", "W(K)", m, se, a.directions, ms))
    return {"input_hash": h, "routes": rows}


def cmd_space_mutual(run: Runner):
    o1, o2, hs = _pair(run)
    me, ms = run.timed(lambda: space.mutual_energy_space(o1, o2, run.args.grid))
    rows = [run.row("dots", "E(K1,K2)", me.value, 0.0, me.n, ms),
            run.row("coscos", "E(K1,K2)", me.coscos, 0.0, me.n, ms)]
    if run.args.seed is not None:
        est, ms = run.timed(lambda: integral_geometry.mc_mutual_circles(o1, o2, run.args.samples, run.args.seed,
                                                                         threads=run.args.threads))
        rows.append(run.row("mc", "E(K1,K2)", est.mean, est.stderr, est.n_samples, ms))
    return {"input_hash": hs, "routes": rows}


def cmd_ig(run: Runner, what: str):
    a = run.args
    run.need_seed()
    objs = [_load(p) for p in a.inputs]
    hs = [h for _, h in objs]
    obj = objs[0][0]
    rows = []
    if what == "circles":
        if len(objs) == 2 or (isinstance(obj, list) and len(obj) == 2 and a.mutual):
            o1, o2, hs = _pair(run)
            est, ms = run.timed(lambda: integral_geometry.mc_mutual_circles(o1, o2, a.samples, a.seed,
                                                                             threads=a.threads))
            rows.append(run.row("mc_mutual", "E(K1,K2)", est.mean, est.stderr, est.n_samples, ms, **est.to_dict()))
        else:
            est, ms = run.timed(lambda: integral_geometry.mc_energy_circles(obj, a.samples, a.seed,
                                                                             threads=a.threads))
            rows.append(run.row("mc_circles", "E(K)", est.mean, est.stderr, est.n_samples, ms, **est.to_dict()))
            if a.eps:
                lad, ms = run.timed(lambda: integral_geometry.mc_cutoff_ladder(obj, a.eps, a.samples, a.seed + 1,
                                                                                threads=a.threads))
                for k, e in enumerate(lad.eps):
                    rows.append(run.row(f"disk_hits@{e:g}", "int hits", lad.hits[k], lad.hits_se[k], a.samples, ms,
                                        expected=float(lad.hits_expected[k])))
                    rows.append(run.row(f"cutoff@{e:g}", "E_eps(K)", lad.energy_cv[k],
                                        integral_geometry.SPACE_CONSTANT * lad.deficit_se[k], a.samples, ms))
                if len(lad.eps) >= 4:
                    fit = lad.counterterm_fit()
                    rows.append(run.row("counterterm", "coef 1/eps", -fit[-1], float("nan"), a.samples, ms,
                                        expected=3 * np.pi * lad.length / 8))
    elif what == "lines":
        curves = _curves_of(obj)
        if all(c.dimension == 2 for c in curves) and len(objs) == 1:
            est, ms = run.timed(lambda: integral_geometry.crofton_length(curves, a.samples, a.seed, threads=a.threads))
            rows.append(run.row("crofton", "int #(l n K) dl", est.mean, est.stderr, est.n_samples, ms,
                                expected=2 * sum(c.length for c in curves)))
        else:
            (const, cse), ms = run.timed(lambda: integral_geometry.calibrate_line_constant(a.samples, a.seed,
                                                                                          threads=a.threads))
            rows.append(run.row("calibration", "line constant", const, cse, a.samples, ms))
            k1, k2 = obj, None
            if len(objs) == 2 or (a.mutual and isinstance(obj, list) and len(obj) == 2):
                k1, k2, hs = _pair(run)
            bp, ms = run.timed(lambda: integral_geometry.bp_lines_check(k1, k2, a.samples, a.seed + 1,
                                                                        constant=const, constant_se=cse,
                                                                        threads=a.threads))
            rows.append(run.row("banchoff_pohl", "C int lambda lambda dl", const * bp.lhs.mean, bp.residual_se,
                                bp.lhs.n_samples, ms, rhs=bp.rhs, residual=bp.residual))
    else:
        radii = a.radii or [0.3, 0.6, 1.2]
        for r in radii:
            f, ms = run.timed(lambda: integral_geometry.dcb_radius_measure(obj, r))
            rows.append(run.row(f"dcb@{r:g}", "f(r,K)", f, 0.0, 0, ms))
            est, ms = run.timed(lambda: integral_geometry.mc_fixed_radius(obj, r, a.samples, a.seed, threads=a.threads))
            rows.append(run.row(f"mc@{r:g}", "f(r,K)", est.mean, est.stderr, est.n_samples, ms))
        s0 = 1e-3 * max(c.diameter for c in _curves_of(obj))
        A0, ms = run.timed(lambda: float(integral_geometry.chord_distribution(obj, [s0])[0]))
        rows.append(run.row("A(0+)", "A_K", A0, 0.0, 0, ms, expected=2 * sum(c.length for c in _curves_of(obj))))
    return {"input_hash": hs, "routes": rows}


def cmd_invariance(run: Runner):
    a = run.args
    run.need_seed()
    obj, h = _load(a.inputs[0])
    f = a.functional
    if f in ("planar-E", "domain-E") and not isinstance(obj, (PlanarDomain, ClosedCurve)):
        raise ConfigError(f"{f} needs a planar curve or domain")
    if f == "domain-E" and not isinstance(obj, PlanarDomain):
        raise ConfigError("domain-E needs a domain record")
    if f == "mutual":
        if not (isinstance(obj, list) and len(obj) == 2):
            raise ConfigError("mutual needs a record with two curves")
        obj = tuple(obj)
    elif f in ("space-E", "writhe"):
        cs = _curves_of(obj)
        if len(cs) != 1:
            raise ConfigError(f"{f} takes a single curve")
        obj = cs[0] if cs[0].dimension == 3 else cs[0].embed3()
    rep = moebius.invariance_suite(f, obj, a.trials, a.seed, maps=a.maps)
    d = rep.to_dict()
    if not run.timing:
        d["runtime_ms"] = 0.0
    d["passes"] = rep.passes()
    return {"input_hash": h, "invariance": d,
            "routes": [run.row(f, "max deviation", rep.max_deviation, float("nan"), a.trials, d["runtime_ms"])]}


def cmd_corpus(run: Runner):
    a = run.args
    sel = a.name or corpus.names()
    unknown = [n for n in sel if n not in corpus.BUILDERS]
    if unknown:
        raise ConfigError(f"unknown corpus entries {unknown}")
    if a.dir:
        d = Path(a.dir)
        d.mkdir(parents=True, exist_ok=True)
        for n in sel:
            (d / f"{n}.json").write_text(corpus.dumps(corpus.to_record(corpus.load(n), n)))
    return {"entries": sel, "directory": a.dir}


# ---------------------------------------------------------------------------
# plumbing


def _common(p: argparse.ArgumentParser, *, inputs: bool = True, mc: bool = False):
    if inputs:
        p.add_argument("--in", dest="inputs", nargs="+", required=True, metavar="JSON",
                       help="curve, domain or curve-list record(s)")
    p.add_argument("--out", help="JSON report path (default: stdout)")
    p.add_argument("--csv", help="also write the route table as CSV")
    p.add_argument("--grid", type=int, default=None, help="quadrature grid size N")
    p.add_argument("--rungs", type=int, default=None, help="cutoff ladder rungs")
    p.add_argument("--largest", type=float, default=None, help="largest cutoff of the ladder")
    p.add_argument("--samples", type=int, default=200_000, help="Monte Carlo sample count")
    p.add_argument("--seed", type=int, default=None, help="random seed (required for Monte Carlo)")
    p.add_argument("--threads", type=int, default=None,
                   help=f"worker threads (overrides ${integral_geometry.THREADS_ENV})")
    p.add_argument("--no-timing", action="store_true", help="write runtime_ms as 0 for byte-identical reports")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="moebius-energy", description=__doc__.split("\n\n")[0])
    sub = ap.add_subparsers(dest="cmd", required=True)

    en = sub.add_parser("energy", help="energy of a planar curve/domain or a space curve")
    ensub = en.add_subparsers(dest="kind", required=True)
    for kind, routes in (("planar", PLANAR_ROUTES), ("space", SPACE_ROUTES)):
        p = ensub.add_parser(kind)
        _common(p)
        p.add_argument("--routes", default="all", help=f"'all' or comma list of {','.join(routes)}")

    pl = sub.add_parser("planar", help="planar quantities")
    plsub = pl.add_subparsers(dest="op", required=True)
    p = plsub.add_parser("potential")
    _common(p)
    p.add_argument("--point", nargs=2, type=float, action="append", metavar=("X", "Y"))
    p = plsub.add_parser("mutual")
    _common(p)
    p = plsub.add_parser("routes")
    _common(p)
    p.add_argument("--routes", default="all")
    p = plsub.add_parser("energy")
    _common(p)
    p.add_argument("--routes", default="all")

    sp = sub.add_parser("space", help="space-curve quantities")
    spsub = sp.add_subparsers(dest="op", required=True)
    for name in ("energy", "routes"):
        p = spsub.add_parser(name)
        _common(p)
        p.add_argument("--routes", default="all")
    p = spsub.add_parser("writhe")
    _common(p)
    p.add_argument("--directions", type=int, default=0, help="also average projections over this many directions")
    p = spsub.add_parser("mutual")
    _common(p)

    ig = sub.add_parser("ig", help="integral-geometry Monte Carlo checks")
    igsub = ig.add_subparsers(dest="op", required=True)
    p = igsub.add_parser("circles")
    _common(p)
    p.add_argument("--eps", type=float, nargs="*", default=None,
                   help="cutoffs for the disk-hit measure (four or more also fit the counterterm)")
    p.add_argument("--mutual", action="store_true", help="treat a two-curve record as a pair")
    p = igsub.add_parser("lines")
    _common(p)
    p.add_argument("--mutual", action="store_true", help="treat a two-curve record as a pair")
    p = igsub.add_parser("chords")
    _common(p)
    p.add_argument("--radii", type=float, nargs="*", default=None)

    p = sub.add_parser("invariance", help="random Moebius-map invariance check")
    _common(p)
    p.add_argument("--functional", choices=moebius.FUNCTIONALS, required=True)
    p.add_argument("--trials", type=int, default=20)
    p.add_argument("--maps", choices=("inversion", "similarity"), default="inversion")

    p = sub.add_parser("corpus", help="list or write the bundled examples")
    _common(p, inputs=False)
    p.add_argument("--name", nargs="*", default=None)
    p.add_argument("--dir", default=None, help="write <name>.json files here")
    return ap


def _dispatch(run: Runner) -> dict:
    a = run.args
    if a.cmd == "energy":
        return cmd_energy(run, a.kind)
    if a.cmd == "planar":
        if a.op in ("routes", "energy"):
            return cmd_energy(run, "planar")
        return cmd_planar_potential(run) if a.op == "potential" else cmd_planar_mutual(run)
    if a.cmd == "space":
        if a.op in ("routes", "energy"):
            return cmd_energy(run, "space")
        return cmd_space_writhe(run) if a.op == "writhe" else cmd_space_mutual(run)
    if a.cmd == "ig":
        return cmd_ig(run, a.op)
    if a.cmd == "invariance":
        return cmd_invariance(run)
    return cmd_corpus(run)


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (np.floating, float)):
        v = float(x)
        return v if np.isfinite(v) else None
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    return x


def write_csv(rows, fh):
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in rows:
        w.writerow([r["route"]] + [repr(float(r[k])) if k != "n" else int(r[k]) for k in CSV_COLUMNS[1:]])


def _validate(args):
    for name in ("grid", "rungs", "largest", "samples", "threads"):
        _positive(name, getattr(args, name, None))
    if getattr(args, "trials", 1) is not None and getattr(args, "trials", 1) <= 0:
        raise ConfigError("--trials must be positive")


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.threads is not None:
        os.environ[integral_geometry.THREADS_ENV] = str(args.threads)
    run = Runner(args)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", ReliabilityWarning)
        try:
            _validate(args)
            report = _dispatch(run)
        except (SchemaError, ConfigError) as exc:
            err = {"error": str(exc), "type": "schema" if isinstance(exc, SchemaError) else "config"}
            print(json.dumps(err), file=sys.stderr)
            return 2
        except (GeometryError, ExtrapolationError) as exc:
            print(json.dumps({"error": str(exc), "type": type(exc).__name__}), file=sys.stderr)
            return 1
    flagged = sorted({str(w.message) for w in caught if issubclass(w.category, ReliabilityWarning)})
    report = {
        "command": [args.cmd] + [v for v in (getattr(args, "kind", None), getattr(args, "op", None)) if v],
        "config": {k: v for k, v in sorted(vars(args).items()) if k not in ("out", "csv", "cmd", "kind", "op")},
        "backend": kernels.BACKEND,
        **report,
        "warnings": flagged,
    }
    text = json.dumps(_jsonable(report), indent=1, sort_keys=True) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    if args.csv and "routes" in report:
        buf = io.StringIO()
        write_csv(report["routes"], buf)
        Path(args.csv).write_text(buf.getvalue())
    return 3 if flagged else 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
