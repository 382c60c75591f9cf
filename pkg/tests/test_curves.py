import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.integrate import quad

from moebius_energy.curves import (
    ClosedCurve,
    DegenerateCurveError,
    GeometryError,
    OffsetError,
    PlanarDomain,
    SchemaError,
    chord_data,
    closest_point,
    eval_frame,
    parallel_curve2,
    parallel_curve3,
    uniform_grid,
    winding_number,
)

ELLIPSE_LENGTH = 9.688448220547675  # adaptive quadrature of |K'| for (2 cos t, sin t)


# -- frames --------------------------------------------------------------


def test_unit_circle_frame(circle):
    fr = eval_frame(circle, 0.0)
    np.testing.assert_allclose(fr.point, [1, 0], atol=1e-15)
    np.testing.assert_allclose(fr.tangent, [0, 1], atol=1e-15)
    assert fr.curvature == pytest.approx(1.0, abs=1e-14)


@pytest.mark.parametrize("R", [0.3, 1.0, 7.5])
def test_circle_curvature_is_inverse_radius(R):
    fr = eval_frame(ClosedCurve.circle(R), uniform_grid(64))
    np.testing.assert_allclose(fr.curvature, 1.0 / R, rtol=1e-12)


def test_ellipse_curvature_against_finite_differences(ellipse):
    h = 1e-5
    x = lambda t: ellipse.evaluate(np.array([t]))[0]
    d1 = (x(h) - x(-h)) / (2 * h)
    d2 = (x(h) - 2 * x(0.0) + x(-h)) / h**2
    kfd = (d1[0] * d2[1] - d1[1] * d2[0]) / np.linalg.norm(d1) ** 3
    k = eval_frame(ellipse, 0.0).curvature
    assert k == pytest.approx(2.0, abs=1e-12)
    # the second difference at h=1e-5 carries ~1e-6 rounding; its error dominates
    assert abs(k - kfd) < 1e-5
    d1x = ellipse.evaluate(np.array([0.0]), 1)[0]
    d2x = ellipse.evaluate(np.array([0.0]), 2)[0]
    np.testing.assert_allclose(d1x, d1, atol=1e-9)
    np.testing.assert_allclose(d2x, d2, atol=1e-5)


def test_space_frame_principal_normal(circle3):
    fr = eval_frame(circle3, np.array([0.0, 1.0]))
    np.testing.assert_allclose(fr.normal, -fr.point, atol=1e-14)
    np.testing.assert_allclose(np.linalg.norm(fr.tangent, axis=1), 1.0)


def test_degenerate_point_raises():
    # x = cos t + cos 2t/2 ... a cusp: (cos t - cos 2t/2... ) use a curve with K'(0)=0
    bad = ClosedCurve([0.0, 0.0], [[1.0, 0.0], [-0.25, 0.0]], [[0.0, 1.0], [0.0, -0.5]], check=False)
    with pytest.raises(DegenerateCurveError):
        eval_frame(bad, 0.0)
    with pytest.raises(GeometryError):
        ClosedCurve(bad.a0, bad.a, bad.b)


# -- arclength -----------------------------------------------------------


def test_arclength_circles():
    assert ClosedCurve.circle(1.0).length == pytest.approx(2 * np.pi, rel=1e-14)
    assert ClosedCurve.circle(3.0).length == pytest.approx(6 * np.pi, rel=1e-14)


def test_arclength_ellipse_matches_adaptive_quadrature(ellipse):
    oracle, _ = quad(lambda t: np.hypot(2 * np.sin(t), np.cos(t)), 0, 2 * np.pi, epsabs=1e-13, epsrel=1e-13, limit=200)
    assert oracle == pytest.approx(ELLIPSE_LENGTH, abs=1e-12)
    assert abs(ellipse.length - oracle) < 1e-10


def test_arclength_converges_spectrally(ellipse):
    errs = [abs(ellipse.arclength(n) - ELLIPSE_LENGTH) for n in (8, 16, 32, 64)]
    # geometric convergence: each doubling at least squares the relative error
    assert errs[1] < errs[0] ** 1.5
    assert errs[2] < errs[1] ** 1.5
    assert errs[3] < 1e-13


# -- chords --------------------------------------------------------------


def test_diameter_chord(circle):
    cd = chord_data(circle, 0.0, np.pi)
    assert cd.r == pytest.approx(2.0)
    assert abs(cd.theta_p) == pytest.approx(np.pi / 2)
    assert abs(cd.theta_q) == pytest.approx(np.pi / 2)


def test_planar_circle_in_space_dihedral(circle3):
    rng = np.random.default_rng(1)
    s, t = rng.uniform(0, 2 * np.pi, (2, 200))
    keep = np.abs(np.angle(np.exp(1j * (s - t)))) > 1e-3
    cd = chord_data(circle3, s[keep], t[keep])
    np.testing.assert_allclose(cd.cos_tau, -1.0, atol=1e-12)
    np.testing.assert_allclose(cd.sin_tau, 0.0, atol=1e-12)


def test_coincident_parameters_raise(circle):
    with pytest.raises(GeometryError):
        chord_data(circle, 1.0, 1.0)


def _dots(curve, s, t):
    Tp = eval_frame(curve, s).tangent
    Tq = eval_frame(curve, t).tangent
    return (Tp * Tq).sum(-1)


def test_planar_product_identity(ellipse):
    rng = np.random.default_rng(2)
    s, t = rng.uniform(0, 2 * np.pi, (2, 10_000))
    cd = chord_data(ellipse, s, t)
    lhs = np.cos(cd.theta_p) * np.cos(cd.theta_q) + np.sin(cd.theta_p) * np.sin(cd.theta_q)
    np.testing.assert_allclose(lhs, _dots(ellipse, s, t), atol=1e-12)


def test_space_product_identity(trefoil):
    rng = np.random.default_rng(3)
    s, t = rng.uniform(0, 2 * np.pi, (2, 10_000))
    cd = chord_data(trefoil, s, t)
    lhs = np.cos(cd.theta_p) * np.cos(cd.theta_q) + cd.cos_tau * np.sin(cd.theta_p) * np.sin(cd.theta_q)
    np.testing.assert_allclose(lhs, _dots(trefoil, s, t), atol=1e-12)
    np.testing.assert_allclose(cd.cos_tau**2 + cd.sin_tau**2, 1.0, atol=1e-12)
    assert np.all((cd.theta_p >= 0) & (cd.theta_p <= np.pi))


@pytest.mark.parametrize("name", ["ellipse", "trefoil"])
def test_near_diagonal_law(name, ellipse, trefoil):
    curve = {"ellipse": ellipse, "trefoil": trefoil}[name]
    s0 = 0.4
    k = float(eval_frame(curve, s0).curvature)
    hs = np.geomspace(1e-4, 1e-2, 9)
    cd = chord_data(curve, np.full(hs.size, s0), s0 + hs)
    slope, _ = np.polyfit(np.log(cd.r), np.log(np.abs(np.sin(cd.theta_p))), 1)
    assert slope == pytest.approx(1.0, rel=1e-2)
    # the first-order correction is linear in r; removing it exposes log(kappa/2)
    _, icpt = np.polyfit(cd.r, np.log(np.abs(np.sin(cd.theta_p)) / cd.r), 1)
    assert icpt == pytest.approx(np.log(abs(k) / 2), abs=1e-2 * abs(np.log(abs(k) / 2)) + 1e-6)


# -- offsets -------------------------------------------------------------


def test_parallel_disk(disk):
    (c,) = parallel_curve2(disk, 0.25)
    fr = eval_frame(c, uniform_grid(32))
    np.testing.assert_allclose(np.linalg.norm(fr.point, axis=1), 0.75, atol=1e-12)


def test_parallel_disk_collapse(disk):
    with pytest.raises(OffsetError) as exc:
        parallel_curve2(disk, 1.0)
    assert exc.value.bound == pytest.approx(1.0)


def test_parallel_ellipse_distance(ellipse_domain, ellipse):
    (c,) = parallel_curve2(ellipse_domain, 0.1)
    pts = c.sample(2048)
    _, d = closest_point(ellipse, pts)
    np.testing.assert_allclose(d, 0.1, atol=1e-6)
    assert c.fit_residual < 1e-9


def test_parallel_space_circle(circle3):
    c = parallel_curve3(circle3, 0.1)
    P = c.sample(64)
    np.testing.assert_allclose(np.linalg.norm(P, axis=1), 0.9, atol=1e-12)
    np.testing.assert_allclose(P[:, 2], 0.0, atol=1e-14)


def test_parallel_space_trefoil(trefoil):
    c = parallel_curve3(trefoil, 0.05)
    _, d = closest_point(trefoil, c.sample(2048))
    np.testing.assert_allclose(d, 0.05, atol=1e-6)


def test_parallel_space_needs_positive_curvature():
    wavy = ClosedCurve.star([(3, 0.3, 0.0)]).embed3()  # planar with inflections
    with pytest.raises(OffsetError, match="curvature tube"):
        parallel_curve3(wavy, 0.01)


# -- domains -------------------------------------------------------------


def test_domain_structure():
    ann = PlanarDomain.annulus(1.0, 4.0)
    assert ann.euler_characteristic == 0
    assert not ann.is_simply_connected
    assert ann.area == pytest.approx(15 * np.pi, rel=1e-12)
    assert ann.contains([[2.0, 0.0]])[0]
    assert not ann.contains([[0.5, 0.0]])[0]
    two = PlanarDomain(ClosedCurve.circle(4.0), [ClosedCurve.circle(1.0, (-1.8, 0)), ClosedCurve.circle(1.0, (1.8, 0))])
    assert two.euler_characteristic == -1
    both = PlanarDomain.disk().disjoint_union(PlanarDomain.disk(1.0, (5.0, 0.0)))
    assert both.euler_characteristic == 2


def test_holes_are_negatively_oriented():
    ann = PlanarDomain.annulus(1.0, 4.0)
    assert ann.outer.signed_area() > 0
    assert ann.holes[0].signed_area() < 0
    assert winding_number(ann.holes[0], [[0.0, 0.0]])[0] == -1


def test_overlapping_boundaries_rejected():
    with pytest.raises(GeometryError):
        PlanarDomain(ClosedCurve.circle(1.0), [ClosedCurve.circle(0.5, (0.7, 0.0))])


def test_curve_json_roundtrip(trefoil):
    rec = json.loads(json.dumps(trefoil.to_dict()))
    back = ClosedCurve.from_dict(rec)
    np.testing.assert_array_equal(back.a, trefoil.a)
    np.testing.assert_array_equal(back.b, trefoil.b)


def test_curve_schema_errors():
    with pytest.raises(SchemaError):
        ClosedCurve.from_dict({"dimension": 2})
    with pytest.raises(SchemaError):
        ClosedCurve.from_dict({"dimension": 2, "modes": 2, "coeffs": {"x": {"a0": 0, "a": [1], "b": [0]},
                                                                       "y": {"a0": 0, "a": [0], "b": [1]}}})


def test_domain_json_roundtrip():
    ann = PlanarDomain.annulus(1.0, 4.0)
    back = PlanarDomain.from_dict(json.loads(json.dumps(ann.to_dict())))
    assert back.euler_characteristic == 0
    assert back.area == pytest.approx(ann.area)


def test_from_samples_recovers_coefficients(trefoil):
    fit = ClosedCurve.from_samples(trefoil.sample(64), modes=5)
    np.testing.assert_allclose(fit.a, trefoil.a, atol=1e-14)
    np.testing.assert_allclose(fit.b, trefoil.b, atol=1e-14)


# -- invariants ----------------------------------------------------------


@given(
    scale=st.floats(0.1, 10.0),
    shift=st.tuples(st.floats(-5, 5), st.floats(-5, 5)),
    t=st.floats(0, 2 * np.pi),
)
def test_frame_under_similarity(ellipse, scale, shift, t):
    moved = ellipse.affine(scale * np.eye(2), np.array(shift))
    f0, f1 = eval_frame(ellipse, t), eval_frame(moved, t)
    assert f1.curvature == pytest.approx(f0.curvature / scale, rel=1e-10)
    np.testing.assert_allclose(f1.tangent, f0.tangent, atol=1e-12)
    assert moved.length == pytest.approx(scale * ellipse.length, rel=1e-12)


@given(s=st.floats(0, 2 * np.pi), t=st.floats(0, 2 * np.pi))
def test_reversal_flips_planar_angles(ellipse, s, t):
    if abs(np.angle(np.exp(1j * (s - t)))) < 1e-3:
        return
    rev = ellipse.reversed()
    a = chord_data(ellipse, s, t)
    # reversed(t) traces K(-t)
    b = chord_data(rev, -s, -t)
    assert b.r == pytest.approx(a.r, rel=1e-12)
    assert np.sin(b.theta_p) == pytest.approx(-np.sin(a.theta_p), abs=1e-10)
