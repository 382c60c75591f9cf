"""Acceptance criteria, one PASS/FAIL line each.

Run standalone with ``python tests/test_acceptance.py`` or through pytest;
either way every criterion prints a single summary line.  Tolerances and
time budgets are pinned in the constants below.  Criterion 12 is
exploratory: its line is printed but never fails the run.
"""
from __future__ import annotations

import itertools
import sys
import time

import numpy as np
import pytest

from moebius_energy import corpus, integral_geometry as ig, moebius, planar, space
from moebius_energy.crossratio import squares_identity
from moebius_energy.curves import ClosedCurve, PlanarDomain, chord_data, eval_frame

PI = np.pi
PI2 = PI**2
CIRCLE_E = PI2 / 2
DISK_E = 3 * PI2 / 4

# pinned tolerances
C1_REL = 1e-3
C2_ABS = 5e-3
C3_C2_REL, C3_C1_REL = 0.02, 0.05
C4_REL = 0.05
C5_REL, C5_SIGMA = 1e-2, 3.0
C6_REL, C6_CONJ = 1e-3, 1e-3
C7_SIGMA = 3.0
C8_SIGMA = 3.0
C9_SIGMA, C9_A0_REL = 3.0, 0.02
C10_PLANAR, C10_ORACLE = 1e-10, 0.05
C11_ABS, C11_LAW_REL = 1e-12, 0.01

# time budgets in seconds
BUDGET = {1: 60, 2: 300, 3: 60, 4: 600, 5: 900, 6: 1200, 7: 600, 8: 600, 9: 600, 10: 300, 11: 60, 12: None}


def _two_hole():
    return corpus.build("two_hole")


# ---------------------------------------------------------------------------


def c1():
    C, D = ClosedCurve.circle(1.0), PlanarDomain.disk()
    vals = {
        "sinsin": planar.curve_energy(C),
        "coscos": planar.curve_energy_cutoff(C, "coscos").value,
        "dots": planar.curve_energy_cutoff(C, "dots").value,
        "segment": planar.segment_energy(C),
        "convex_chord": planar.convex_chord_energy(D),
        "nt": planar.nt_energy(D, 20_000, seed=1).value,
    }
    errs = {k: abs(v / CIRCLE_E - 1) for k, v in vals.items()}
    errs["domain"] = abs(planar.domain_energy(D).value / DISK_E - 1)
    worst = max(errs, key=errs.get)
    return max(errs.values()) < C1_REL, f"worst route {worst} rel err {errs[worst]:.2e}"


def c2():
    doms = {"disk": PlanarDomain.disk(), "annulus": corpus.build("annulus_1_4"), "two_hole": _two_hole()}
    out = {}
    for k, d in doms.items():
        out[k] = planar.domain_energy(d).value - planar.curve_energy(d) - PI2 * d.euler_characteristic / 4
    ok = all(abs(v) < C2_ABS for v in out.values())
    return ok, ", ".join(f"{k} {v:+.1e}" for k, v in out.items())


def c3():
    worst2 = worst1 = 0.0
    for d in (PlanarDomain(ClosedCurve.ellipse(2.0, 1.0)), corpus.build("star3")):
        for t in (0.0, 1.0, 2.5):
            p = planar.potential_asymptotics(d, 0, t)
            worst2 = max(worst2, abs(p.c2 / (-PI / 4) - 1))
            worst1 = max(worst1, abs(p.c1 / (-p.curvature * PI / 4) - 1))
    return worst2 < C3_C2_REL and worst1 < C3_C1_REL, f"max rel err c2 {worst2:.1e}, c1 {worst1:.1e}"


def c4():
    E = ClosedCurve.ellipse(2.0, 1.0)
    L = E.length
    T = ClosedCurve.trefoil()
    LT = T.length
    C = ClosedCurve.circle(1.0, (0, 0, 0), (0, 0, 1))
    fitted = {
        "domain pi L/4": (-planar.domain_energy(PlanarDomain(E), diagnostic=True).coefficients[-1], PI * L / 4),
        "coscos L": (-planar.curve_energy_cutoff(E, "coscos", diagnostic=True)[-1], L),
        "dots L/2": (-planar.curve_energy_cutoff(E, "dots", diagnostic=True)[-1], L / 2),
        "parallel pi L/4": (space.space_energy_parallel(T, diagnostic=True).diagnostics["counterterm_fitted"], PI * LT / 4),
    }
    lad = ig.mc_cutoff_ladder(C, [0.4, 0.2, 0.1, 0.05, 0.025], n_samples=400_000, seed=3)
    fitted["MC 3 pi L/8"] = (-lad.counterterm_fit()[-1], 3 * PI * C.length / 8)
    errs = {k: abs(a / b - 1) for k, (a, b) in fitted.items()}
    worst = max(errs, key=errs.get)
    return max(errs.values()) < C4_REL, f"worst {worst} rel err {errs[worst]:.1e}"


def c5():
    T = ClosedCurve.trefoil()
    vals = {
        "direct": space.space_energy(T).value,
        "coscos": space.space_energy_cutoff(T, "coscos").value,
        "dots": space.space_energy_cutoff(T, "dots").value,
        "parallel": space.space_energy_parallel(T).value,
    }
    gap = max(abs(a - b) / abs(b) for a, b in itertools.combinations(vals.values(), 2))
    mc = ig.mc_energy_circles(T, 1_000_000, seed=5)
    z = (mc.mean - vals["direct"]) / mc.stderr
    ok = gap < C5_REL and mc.within(vals["direct"], C5_SIGMA)
    return ok, f"max pairwise rel gap {gap:.1e}, MC z = {z:+.2f}"


def c6():
    E = ClosedCurve.ellipse(2.0, 1.0)
    T = ClosedCurve.trefoil()
    cases = [
        ("planar-E", E),
        ("space-E", T),
        ("writhe", T),
        ("mutual", tuple(corpus.build("circle_ellipse_link"))),
        ("domain-E", PlanarDomain(E)),
    ]
    worst = 0.0
    for fn, obj in cases:
        rep = moebius.invariance_suite(fn, obj, trials=20, seed=11)
        worst = max(worst, rep.max_deviation / (1 + abs(rep.base)))
    conj = moebius.conjugate_pair_energy()
    ok = worst < C6_REL and abs(conj.extrapolated) < C6_CONJ
    return ok, f"max scaled deviation {worst:.1e}, conjugate pair {conj.extrapolated:.1e}"


def c7():
    C = ClosedCurve.circle(1.0, (0, 0, 0), (0, 0, 1))
    lad = ig.mc_cutoff_ladder(C, [0.1, 0.05], n_samples=400_000, seed=7)
    zh = np.abs(lad.hits - lad.hits_expected) / lad.hits_se
    zs, within = [], []
    for name in ("hopf_pair", "circle_ellipse_link"):
        pair = corpus.build(name)
        est = ig.mc_mutual_circles(*pair, 400_000, seed=8)
        exact = space.mutual_energy_space(*pair).value
        zs.append(abs(est.mean - exact) / est.stderr)
        within.append(est.within(exact, C7_SIGMA))
    ok = bool(np.all(zh < C7_SIGMA)) and all(within)
    return ok, f"hits |z| {zh.max():.2f}, mutual |z| {max(zs):.2f}"


def c8():
    const, se = ig.calibrate_line_constant(1_000_000, seed=7)
    link = corpus.build("circle_ellipse_link")
    zs = []
    for args in (tuple(link), (ClosedCurve.trefoil(), None)):
        b = ig.bp_lines_check(*args, n_samples=1_000_000, seed=8, constant=const, constant_se=se)
        zs.append((b.passes(C8_SIGMA), abs(b.residual) / b.residual_se))
    ok = all(p for p, _ in zs)
    return ok, f"constant {const:.4f} +- {se:.4f}, max |z| {max(z for _, z in zs):.2f}"


def c9():
    C = ClosedCurve.circle(1.0, (0, 0, 0), (0, 0, 1))
    zs = []
    for r in (0.3, 0.6, 1.2):
        f = ig.dcb_radius_measure(C, r)
        est = ig.mc_fixed_radius(C, r, 200_000, seed=5)
        zs.append(abs(est.mean - f) / est.stderr)
    a0 = max(abs(ig.chord_distribution(K, [1e-4])[0] / (2 * K.length) - 1) for K in (C, ClosedCurve.trefoil()))
    ok = max(zs) < C9_SIGMA and a0 < C9_A0_REL
    return ok, f"max |z| {max(zs):.2f}, A(0+)/2L rel err {a0:.1e}"


def c10():
    planar_curves = [ClosedCurve.circle(1.0, (0, 0, 0), (1, 1, 0)), ClosedCurve.ellipse(2.0, 1.0), ClosedCurve.star([(3, 0.3, 0.0)])]
    wp = max(abs(space.writhe(c)) for c in planar_curves)
    T = ClosedCurve.trefoil()
    w = space.writhe(T)
    proj, _ = space.writhe_projection(T, n_dirs=100, seed=0)
    mirror = space.writhe(T.mirrored())
    ok = wp < C10_PLANAR and abs(w - proj) < C10_ORACLE and abs(w + mirror) < 1e-8
    return ok, f"planar |W| {wp:.1e}, W {w:.4f} vs projection {proj:.4f}, mirror {mirror:.4f}"


def c11():
    rng = np.random.default_rng(11)
    # squares identity
    sq = 0.0
    for _ in range(10_000):
        w, z = complex(*rng.standard_normal(2)), complex(*rng.standard_normal(2))
        if abs(w - z) < 0.1:
            continue
        re, im, target = squares_identity(w, z)
        sq = max(sq, abs(re / target - 1), abs(im / target - 1))
    # dot-form decompositions
    E, T = ClosedCurve.ellipse(2.0, 1.0), ClosedCurve.trefoil()
    dots = 0.0
    for K, planar_form in ((E, True), (T, False)):
        s, t = rng.uniform(0, 2 * PI, (2, 10_000))
        cd = chord_data(K, s, t)
        tau = 1.0 if planar_form else cd.cos_tau
        lhs = np.cos(cd.theta_p) * np.cos(cd.theta_q) + tau * np.sin(cd.theta_p) * np.sin(cd.theta_q)
        rhs = (eval_frame(K, s).tangent * eval_frame(K, t).tangent).sum(-1)
        dots = max(dots, float(np.abs(lhs - rhs).max()))
    # near-diagonal law: slope 1 and sin(theta_p)/r -> kappa/2 at random base points
    hs = np.geomspace(1e-4, 1e-2, 9)
    law = 0.0
    for K in (E, T):
        s0 = rng.uniform(0, 2 * PI, 1111)
        kap = np.abs(eval_frame(K, s0).curvature)
        cd = chord_data(K, np.repeat(s0, hs.size), np.add.outer(s0, hs).ravel())
        lr = np.log(cd.r).reshape(-1, hs.size)
        ls = np.log(np.abs(np.sin(cd.theta_p))).reshape(-1, hs.size)
        r = cd.r.reshape(-1, hs.size)
        slope = np.array([np.polyfit(lr[i], ls[i], 1)[0] for i in range(s0.size)])
        icpt = np.array([np.polyfit(r[i], ls[i] - lr[i], 1)[1] for i in range(s0.size)])
        law = max(law, float(np.abs(slope - 1).max()), float(np.abs(np.exp(icpt) / (kap / 2) - 1).max()))
    ok = sq < C11_ABS and dots < C11_ABS and law < C11_LAW_REL
    return ok, f"squares {sq:.1e}, dot forms {dots:.1e}, near-diagonal law {law:.1e}"


def c12():
    rng = np.random.default_rng(12)
    vals = [planar.domain_energy(planar.random_star_domain(rng)).value for _ in range(50)]
    below = sum(v < DISK_E for v in vals)
    tc = planar.tangent_circle_energy(PlanarDomain.disk())
    bound = (3 * 1 + 1) * PI2 / 4  # n = k = 1 for the disk
    flag = (f"printed bound (3n+k)pi^2/4 = {bound:.4f} exceeds the computed disk value {DISK_E:.4f}; "
            f"tangent-circle constant printed {tc.constant_printed:.4f}, disk-calibrated {tc.constant:.4f}")
    return below == 0, f"min E {min(vals):.4f} vs disk {DISK_E:.4f}, {below}/50 below; FLAG {flag}"


CRITERIA = {
    1: ("disk/circle oracle suite", c1),
    2: ("relation identity", c2),
    3: ("potential asymptotics", c3),
    4: ("counterterm coefficients", c4),
    5: ("space route agreement", c5),
    6: ("Moebius invariance", c6),
    7: ("circle-measure constants", c7),
    8: ("line-measure transfer", c8),
    9: ("chord-distribution cross-check", c9),
    10: ("writhe", c10),
    11: ("pointwise identities", c11),
    12: ("disk-minimality probe (exploratory)", c12),
}


def evaluate(k: int) -> tuple[bool, str]:
    name, fn = CRITERIA[k]
    t0 = time.perf_counter()
    ok, detail = fn()
    dt = time.perf_counter() - t0
    budget = BUDGET[k]
    if budget is not None and dt > budget:
        ok, detail = False, detail + f"; over budget {budget}s"
    line = f"{'PASS' if ok else 'FAIL'} criterion {k:2d} {name}: {detail} [{dt:.1f}s]"
    return bool(ok), line


@pytest.mark.acceptance
@pytest.mark.parametrize("k", sorted(CRITERIA))
def test_criterion(k, capsys):
    ok, line = evaluate(k)
    with capsys.disabled():
        print("\n" + line)
    if k != 12:
        assert ok, line


if __name__ == "__main__":
    sel = [int(a) for a in sys.argv[1:]] or sorted(CRITERIA)
    results = [evaluate(k) for k in sel]
    for _, line in results:
        print(line)
    sys.exit(0 if all(ok for (ok, _), k in zip(results, sel) if k != 12) else 1)
