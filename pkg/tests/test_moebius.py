import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from moebius_energy import planar, space
from moebius_energy.curves import ClosedCurve, GeometryError, PlanarDomain, eval_frame
from moebius_energy.moebius import (
    MoebiusMap,
    apply,
    apply_domain,
    conjugate_pair_energy,
    curvature_tube_distance,
    image_circle,
    invariance_suite,
    random_moebius,
    safe_inversion_center,
)

PI2 = np.pi**2


def _curvature(curve, n=512):
    t = np.linspace(0, 2 * np.pi, n, endpoint=False)
    return eval_frame(curve, t).curvature


# -- maps ----------------------------------------------------------------


def test_identity_keeps_coefficients(trefoil):
    img = apply(MoebiusMap.identity(), trefoil)
    assert np.array_equal(img.a, trefoil.a) and np.array_equal(img.b, trefoil.b)


def test_inverse_roundtrip():
    f = MoebiusMap.inversion([1.0, 2.0, 0.5], 1.5).then(MoebiusMap.similarity(np.eye(3), 3.0, [1.0, 0, 0]))
    x = np.random.default_rng(0).standard_normal((20, 3))
    assert np.allclose(f.inverse()(f(x)), x, atol=1e-12)


def test_jacobian_is_conformal():
    f = MoebiusMap.inversion([0.3, -1.0, 2.0], 2.0).then(MoebiusMap.reflection([0, 0, 0], [1.0, 1.0, 0]))
    x = np.random.default_rng(1).standard_normal((5, 3))
    for J in f.jacobian(x):
        G = J.T @ J
        assert np.allclose(G, G[0, 0] * np.eye(3), atol=1e-12 * G[0, 0])


def test_circle_image_has_constant_curvature(circle3):
    img = apply(MoebiusMap.inversion([0.3, 0.2, 1.5], 1.0), circle3)
    k = _curvature(img)
    assert np.ptp(k) < 1e-8 * k.mean()


def test_circle_image_radius(circle3):
    f = MoebiusMap.inversion([5.0, 0.0, 0.0], 1.0)
    _, r, _ = image_circle((0, 0, 0), 1.0, (0, 0, 1), f)
    assert r == pytest.approx(1 / 24, rel=1e-12)
    k = _curvature(apply(f, circle3))
    assert k.mean() == pytest.approx(24.0, rel=1e-8)


def test_singular_point_on_curve_rejected(circle3):
    with pytest.raises(GeometryError):
        apply(MoebiusMap.inversion([1.0, 0.0, 0.0], 1.0), circle3)


def test_domain_image_must_stay_compact():
    with pytest.raises(GeometryError, match="unbounded"):
        apply_domain(MoebiusMap.inversion([0.1, 0.0], 1.0), PlanarDomain.disk())


def test_orientation_reversing_domain_image_keeps_orientation():
    img = apply_domain(MoebiusMap.inversion([3.0, 0.0], 1.0), PlanarDomain.disk())
    assert img.outer.signed_area() > 0


def test_composition_consistency(trefoil):
    f = MoebiusMap.inversion([3.0, 1.0, -2.0], 2.0)
    g = MoebiusMap.inversion([-4.0, 0.5, 1.0], 3.0).then(MoebiusMap.similarity(np.eye(3), 2.0))
    once = apply(f.then(g), trefoil)
    twice = apply(g, apply(f, trefoil))
    t = np.linspace(0, 2 * np.pi, 257)
    err = np.abs(once.evaluate(t) - twice.evaluate(t)).max()
    assert err < 1e-7 * once.diameter


# -- admissible centers --------------------------------------------------


@pytest.mark.parametrize("c", [(3.0, 0.0, 1.0), (0.0, 0.0, 2.5), (-1.5, 1.5, -0.5)])
def test_unit_circle_far_centers_admissible(circle3, c):
    assert curvature_tube_distance(circle3, c)[0] > 0.05 * circle3.diameter


def test_center_on_curve_rejected(circle3):
    assert curvature_tube_distance(circle3, [1.0, 0.0, 0.0])[0] < 1e-12


def test_trefoil_center_clear_of_tube(trefoil):
    c, r = safe_inversion_center(trefoil, 3)
    assert r > 0
    assert curvature_tube_distance(trefoil, c, n=8192)[0] > 0


def test_rejection_budget(circle3):
    with pytest.raises(GeometryError, match="budget"):
        safe_inversion_center(circle3, 0, avoid=lambda x: True)


# -- invariance harness --------------------------------------------------


def test_planar_energy_under_inversions(ellipse):
    rep = invariance_suite("planar-E", ellipse, trials=3, seed=1)
    assert rep.passes(1e-3)
    assert len(rep.values) == 3


def test_similarities_exact(trefoil):
    rep = invariance_suite("space-E", trefoil, trials=3, seed=2, maps="similarity")
    assert rep.max_deviation < 1e-10


def test_writhe_orientation_preserving_maps(trefoil):
    rep = invariance_suite("writhe", trefoil, trials=2, seed=3)
    assert rep.max_deviation < 5e-3


def test_domain_energy_disk_images():
    rep = invariance_suite("domain-E", PlanarDomain.disk(), trials=2, seed=4)
    assert rep.max_deviation < 1e-3 * (1 + 3 * PI2 / 4)


def test_mutual_energy_invariance():
    from moebius_energy import corpus

    rep = invariance_suite("mutual", corpus.build("circle_ellipse_link"), trials=2, seed=5)
    assert rep.max_deviation < 1e-6


def test_report_serializes(ellipse):
    d = invariance_suite("planar-E", ellipse, trials=1, seed=0).to_dict()
    assert set(d) >= {"functional", "base", "values", "max_deviation", "redraws", "runtime_ms"}


def test_unknown_functional(ellipse):
    with pytest.raises(ValueError):
        invariance_suite("nope", ellipse, trials=1)


@settings(max_examples=5)
@given(seed=st.integers(0, 10_000))
def test_random_map_space_energy_property(circle3, seed):
    f = random_moebius(circle3, np.random.default_rng(seed))
    assert space.space_energy(apply(f, circle3)).value == pytest.approx(PI2 / 2, abs=1e-8)


@settings(max_examples=5)
@given(seed=st.integers(0, 10_000))
def test_random_map_planar_circle_property(seed):
    circ = ClosedCurve.circle(1.0)
    f = random_moebius(circ, np.random.default_rng(seed))
    assert planar.curve_energy(apply(f, circ)) == pytest.approx(PI2 / 2, abs=1e-8)


# -- conjugate circles ---------------------------------------------------


def test_conjugate_pair_energy_vanishes():
    res = conjugate_pair_energy()
    assert abs(res.extrapolated) < 1e-3
    assert abs(res.exact) < 1e-10
