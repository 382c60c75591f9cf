import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from moebius_energy import corpus, integral_geometry as ig
from moebius_energy.curves import ClosedCurve, ReliabilityWarning
from moebius_energy.space import mutual_energy_space

PI2 = np.pi**2
TREFOIL_E = 10.280201171726521
CIRCLE_ELLIPSE_MUTUAL = 1.5361651049049945


def _crossings_oracle(gamma, K, n=200_000):
    """Signed crossings of ``K`` through the disk of ``gamma`` on a dense polyline."""
    t = np.linspace(0, 2 * np.pi, n, endpoint=False)
    P = K.evaluate(t)
    h = (P - gamma.center) @ gamma.normal
    i = np.nonzero(np.sign(h) != np.sign(np.roll(h, -1)))[0]
    j = (i + 1) % n
    a = h[i] / (h[i] - h[j])
    X = P[i] + a[:, None] * (P[j] - P[i])
    inside = np.linalg.norm(X - gamma.center, axis=1) <= gamma.radius
    signs = np.sign(h[j] - h[i])[inside]
    return signs.astype(int)


# -- linking -------------------------------------------------------------


def test_linking_small_circle(circle3):
    g = ig.Circle3(np.array([1.0, 0, 0]), 0.5, np.array([0, 1.0, 0]))
    lam, hits = ig.linking_circle(g, circle3)
    assert abs(lam) == 1 and hits == 1


def test_linking_far_circle(circle3):
    g = ig.Circle3(np.array([5.0, 0, 0]), 0.5, np.array([0, 1.0, 0]))
    assert ig.linking_circle(g, circle3) == (0, 0)


def test_linking_trefoil_three_crossings(trefoil):
    g = ig.Circle3(np.zeros(3), 2.5, np.array([0, -1.0, 0]))
    signs = _crossings_oracle(g, trefoil)
    assert sorted(signs.tolist()) == [-1, 1, 1]
    assert ig.linking_circle(g, trefoil) == (1, 3)


@pytest.mark.parametrize(
    "center,radius,normal",
    [
        ((1.0, 0, 0), 0.5, (1.0, 0, 0)),  # plane x=1 touches K at (1,0,0) without crossing
        ((1.5, 0, 0), 0.5, (0, 1.0, 0)),  # K crosses y=0 exactly on the rim
    ],
)
def test_linking_tangential_raises(circle3, center, radius, normal):
    g = ig.Circle3(np.array(center), radius, np.array(normal))
    with pytest.raises(ig.DegenerateSampleError):
        ig.linking_circle(g, circle3)


def test_circle3_validation():
    with pytest.raises(ValueError):
        ig.Circle3(np.zeros(3), 0.0, np.array([0, 0, 1.0]))
    g = ig.Circle3(np.zeros(3), 1.0, np.array([0, 0, 3.0]))
    assert np.linalg.norm(g.normal) == pytest.approx(1.0)


def test_linking_line_hopf():
    K = ClosedCurve.circle(1.0, (0, 0, 0), (0, 0, 1))
    assert abs(ig.linking_line([0, 0, -5.0], [0, 0, 1.0], K)) == 1
    assert ig.linking_line([3.0, 0, -5.0], [0, 0, 1.0], K) == 0


def test_lambda_flips_with_normal(trefoil):
    circles = list(ig.sample_circles([trefoil], 1000, 3, r_min=0.05, r_max=5.0))
    for g, _ in circles:
        try:
            lam, hits = ig.linking_circle(g, trefoil)
        except ig.DegenerateSampleError:
            continue
        lam2, hits2 = ig.linking_circle(g.flipped(), trefoil)
        assert lam2 == -lam and hits2 == hits
        # hits - lambda^2 vanishes whenever the disk is pierced at most once
        if hits <= 1:
            assert hits - lam**2 == 0


def test_sampler_weights_positive():
    ws = np.array([w for _, w in ig.sample_circles([ClosedCurve.trefoil()], 2000, 0, r_min=1e-3, r_max=100.0)])
    assert np.all(ws > 0) and np.all(np.isfinite(ws))


def test_sampler_rejects_bad_window(circle3):
    with pytest.raises(ValueError):
        next(ig.sample_circles([circle3], 10, 0, r_min=0.0, r_max=1.0))
    with pytest.raises(ValueError):
        next(ig.sample_circles([circle3], 10, 0, r_min=2.0, r_max=1.0))


# -- circle-measure estimators -------------------------------------------


def test_hits_measure_constant(circle3):
    lad = ig.mc_cutoff_ladder(circle3, [0.1, 0.05], n_samples=200_000, seed=1)
    for h, se, exp in zip(lad.hits, lad.hits_se, lad.hits_expected):
        assert abs(h - exp) < 3 * se
    assert np.allclose(lad.hits_expected, 2 * PI2 * 2 * np.pi / np.array([0.1, 0.05]))


@pytest.mark.slow
def test_circle_energy_mc(circle3):
    est = ig.mc_energy_circles(circle3, 200_000, seed=2)
    assert est.within(PI2 / 2)
    assert est.discard_rate < 0.01
    assert est.extra["single_hit_violations"] == 0


@pytest.mark.slow
def test_trefoil_energy_mc(trefoil):
    est = ig.mc_energy_circles(trefoil, 300_000, seed=4)
    assert est.within(TREFOIL_E)


@pytest.mark.slow
def test_counterterm_diagnostic(circle3):
    lad = ig.mc_cutoff_ladder(circle3, [0.4, 0.2, 0.1, 0.05, 0.025], n_samples=400_000, seed=3)
    fit = lad.counterterm_fit()
    assert -fit[-1] == pytest.approx(3 * np.pi * 2 * np.pi / 8, rel=5e-2)


def test_mc_reproducible_and_thread_independent(trefoil):
    a = ig.mc_energy_circles(trefoil, 20_000, seed=9, threads=1)
    b = ig.mc_energy_circles(trefoil, 20_000, seed=9, threads=3)
    assert a.mean == b.mean and a.stderr == b.stderr
    c = ig.mc_energy_circles(trefoil, 20_000, seed=10)
    assert c.mean != a.mean


def test_stderr_scaling(trefoil):
    a = ig.mc_energy_circles(trefoil, 40_000, seed=1)
    b = ig.mc_energy_circles(trefoil, 160_000, seed=1)
    # four times the samples halves the error, up to batch-means noise
    assert 1.4 < a.stderr / b.stderr < 2.9


def test_tail_bound_covers_window_change(circle3):
    a = ig.mc_energy_circles(circle3, 60_000, seed=5, r_max=10.0)
    b = ig.mc_energy_circles(circle3, 60_000, seed=5, r_max=20.0)
    assert a.tail_bound > 0
    assert abs(a.mean - b.mean) <= a.tail_bound + 3 * np.hypot(a.stderr, b.stderr)


def test_rigid_motion_of_estimator(trefoil):
    rng = np.random.default_rng(2)
    q, _ = np.linalg.qr(rng.standard_normal((3, 3)))
    moved = trefoil.affine(q, [4.0, -2.0, 1.0])
    a = ig.mc_energy_circles(trefoil, 60_000, seed=6)
    b = ig.mc_energy_circles(moved, 60_000, seed=6)
    assert abs(a.mean - b.mean) < 3 * np.hypot(a.stderr, b.stderr)


def test_mutual_linked_pair():
    a, b = corpus.build("circle_ellipse_link")
    direct = mutual_energy_space(a, b).value
    assert direct == pytest.approx(CIRCLE_ELLIPSE_MUTUAL, rel=1e-10)
    est = ig.mc_mutual_circles(a, b, 200_000, seed=1)
    assert est.within(direct)


def test_mutual_far_pair(circle3):
    far = ClosedCurve.circle(1.0, (8.0, 0, 0), (0, 0, 1))
    est = ig.mc_mutual_circles(circle3, far, 100_000, seed=2)
    assert est.within(mutual_energy_space(circle3, far).value)


def test_mutual_conjugate_pair():
    a, b = corpus.build("conjugate_pair")
    est = ig.mc_mutual_circles(a, b, 100_000, seed=3)
    assert est.within(0.0)


def test_discard_rate_warning():
    with pytest.warns(ReliabilityWarning):
        ig.MCEstimate(1.0, 0.1, 100, discard_rate=0.05)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        ig.MCEstimate(1.0, 0.1, 100, discard_rate=0.001)


def test_estimate_serialization(circle3):
    est = ig.mc_energy_circles(circle3, 5_000, seed=0)
    d = est.to_dict()
    assert {"mean", "stderr", "n_samples", "r_min", "r_max", "tail_bound", "discard_rate"} <= set(d)
    assert d["r_min"] == pytest.approx(2e-3)
    assert d["r_max"] == pytest.approx(60.0)


def test_threads_env(monkeypatch):
    monkeypatch.setenv(ig.THREADS_ENV, "4")
    assert ig.resolve_threads() == 4
    assert ig.resolve_threads(2) == 2
    monkeypatch.delenv(ig.THREADS_ENV)
    assert ig.resolve_threads() == 1


# -- lines ---------------------------------------------------------------


def test_coscos_single_circle_closed_form(circle3):
    # chords of the unit circle make equal angles with both ends: cos^2 integrates to 2 pi^2
    assert ig.coscos_pair_integral(circle3) == pytest.approx(2 * PI2, rel=1e-10)


def test_line_calibration_near_one():
    c, se = ig.calibrate_line_constant(100_000, seed=1)
    assert abs(c - 1.0) < 4 * se


def test_bp_single_circle(circle3):
    chk = ig.bp_lines_check(circle3, n_samples=100_000, seed=2)
    assert chk.rhs == pytest.approx(2 * PI2, rel=1e-10)
    assert chk.passes()


@pytest.mark.slow
def test_bp_tilted_pair():
    a, b = corpus.build("circle_ellipse_link")
    c, se = ig.calibrate_line_constant(200_000, seed=11)
    chk = ig.bp_lines_check(a, b, n_samples=400_000, seed=12, constant=c, constant_se=se)
    assert chk.passes()


def test_bp_far_pair(circle3):
    far = ClosedCurve.circle(1.0, (12.0, 0, 0), (0, 1, 0))
    chk = ig.bp_lines_check(circle3, far, n_samples=50_000, seed=3)
    assert abs(chk.rhs) < 0.1
    assert chk.passes()


def test_crofton_circle(circle):
    est = ig.crofton_length(circle, 100_000, seed=1)
    assert abs(est.mean / 2 - 2 * np.pi) < 3 * est.stderr / 2


def test_crofton_ellipse(ellipse):
    est = ig.crofton_length(ellipse, 100_000, seed=2)
    assert abs(est.mean / 2 - ellipse.length) < 3 * est.stderr / 2


def test_crofton_additive():
    a, b = ClosedCurve.circle(1.0), ClosedCurve.circle(0.5, (3.0, 0.0))
    both = ig.crofton_length([a, b], 100_000, seed=4)
    assert abs(both.mean / 2 - (a.length + b.length)) < 3 * both.stderr / 2


# -- chords --------------------------------------------------------------


def test_chord_distribution_circle(circle3):
    s = np.array([1e-3, 0.5, 1.0, 1.9, 2.5])
    A = ig.chord_distribution(circle3, s)
    ref = 4 * np.pi * np.sqrt(np.clip(1 - s**2 / 4, 0, None))
    np.testing.assert_allclose(A, ref, rtol=1e-6, atol=1e-9)
    assert A[-1] == 0.0


def test_chord_distribution_small_s(trefoil):
    A = ig.chord_distribution(trefoil, np.array([1e-3, 2e-3, 4e-3]))
    np.testing.assert_allclose(A, 2 * trefoil.length, rtol=2e-2)


@pytest.mark.parametrize("r", [0.3, 0.6])
def test_fixed_radius_matches_formula(circle3, r):
    f = ig.dcb_radius_measure(circle3, r)
    est = ig.mc_fixed_radius(circle3, r, 100_000, seed=int(r * 10))
    assert est.within(f)


@settings(max_examples=4)
@given(r=st.floats(0.05, 3.0))
def test_dcb_scales_like_r_squared_for_small_circles(r):
    # f(r, cK) = c^2 f(r/c, K): the measure dc dn scales like length^3, lambda^2 is scale free
    K = ClosedCurve.circle(1.0, (0, 0, 0), (0, 0, 1))
    K2 = ClosedCurve.circle(2.0, (0, 0, 0), (0, 0, 1))
    assert ig.dcb_radius_measure(K2, 2 * r) == pytest.approx(8 * ig.dcb_radius_measure(K, r), rel=1e-8)
