import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from moebius_energy.crossratio import (
    TangentPairFrame,
    eval_omega_cr,
    omega_matrix,
    random_frames,
    squares_identity,
    wedge_square,
)

finite = st.floats(-5, 5, allow_nan=False)
cplx = st.builds(complex, finite, finite)


def test_trivial_frame():
    fr = TangentPairFrame.split(0, 1, 1, 1)
    assert eval_omega_cr(fr) == 1


def test_plane_vectors_accepted():
    fr = TangentPairFrame.split([0.0, 0.0], [0.0, 2.0], [1.0, 0.0], [0.0, 1.0])
    assert eval_omega_cr(fr) == pytest.approx(1j / (-2j) ** 2)


def test_coincident_points_raise():
    with pytest.raises(ValueError):
        TangentPairFrame.split(1 + 1j, 1 + 1j, 1, 1)


def test_inversion_invariance():
    inv, dinv = (lambda z: 1 / z), (lambda z: -1 / z**2)
    for fr in random_frames(np.random.default_rng(0), 200):
        if min(abs(fr.w), abs(fr.z)) < 1e-2:
            continue
        a = eval_omega_cr(fr)
        b = eval_omega_cr(fr.pushforward(inv, dinv))
        assert abs(a - b) <= 1e-12 * max(1.0, abs(a))


def test_affine_invariance():
    h, dh = (lambda z: (2 - 1j) * z + 3), (lambda z: 2 - 1j)
    for fr in random_frames(np.random.default_rng(1), 50):
        assert eval_omega_cr(fr.pushforward(h, dh)) == pytest.approx(eval_omega_cr(fr), rel=1e-12)


def test_squares_identity_many_frames():
    rng = np.random.default_rng(2)
    for _ in range(1000):
        w, z = complex(*rng.standard_normal(2)), complex(*rng.standard_normal(2))
        if abs(w - z) < 0.1:
            continue
        re, im, target = squares_identity(w, z)
        assert re == pytest.approx(target, rel=1e-12)
        assert im == pytest.approx(target, rel=1e-12)


def test_matrix_antisymmetric():
    M = omega_matrix(0.3 + 0.1j, -1.0 + 2j)
    assert np.allclose(M, -M.T, atol=0)


def test_wedge_square_of_standard_form():
    a = np.zeros((4, 4))
    a[0, 1], a[1, 0], a[2, 3], a[3, 2] = 1, -1, 1, -1
    assert wedge_square(a) == 2.0


@given(w=cplx, z=cplx, x=st.tuples(cplx, cplx), y=st.tuples(cplx, cplx))
def test_antisymmetry_in_slots(w, z, x, y):
    if abs(w - z) < 1e-3:
        return
    xy = eval_omega_cr(TangentPairFrame(w, z, (x[0], y[0]), (x[1], y[1])))
    yx = eval_omega_cr(TangentPairFrame(w, z, (y[0], x[0]), (y[1], x[1])))
    xx = eval_omega_cr(TangentPairFrame(w, z, (x[0], x[0]), (x[1], x[1])))
    assert abs(xy + yx) <= 1e-12 * (1 + abs(xy))
    assert xx == 0
