import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from moebius_energy.curves import PlanarDomain
from moebius_energy.planar import potential_cutoff
from moebius_energy.renorm import (
    DivergenceModel,
    ExtrapolationError,
    extrapolate,
    fit_coefficients,
    geometric_ladder,
)


def test_linear_family():
    eps = geometric_ladder(1.0, 6)
    res = extrapolate(zip(eps, 5 + eps), DivergenceModel((0, 1)))
    assert res.value == pytest.approx(5.0, abs=1e-14)
    assert res.fit_residual < 1e-14


def test_pole_family():
    eps = geometric_ladder(0.5, 6)
    res = extrapolate(zip(eps, 1 / eps + 7), DivergenceModel((-1, 0)))
    assert res.value == pytest.approx(7.0, abs=1e-12)
    assert res.coefficients[-1] == pytest.approx(1.0, rel=1e-12)


def test_pinned_counterterm_reports_leftover():
    eps = geometric_ladder(0.5, 6)
    vals = 3 / eps + 2 - eps
    res = extrapolate(zip(eps, vals), DivergenceModel((0, 1), {-1: 3.0}))
    assert res.value == pytest.approx(2.0, abs=1e-12)
    assert abs(res.divergent_residual[-1]) < 1e-10
    wrong = extrapolate(zip(eps, vals), DivergenceModel((0, 1), {-1: 2.5}))
    assert wrong.divergent_residual[-1] == pytest.approx(0.5, rel=1e-8)


def test_disk_potential_at_center_from_cutoff():
    disk = PlanarDomain.disk()
    eps = geometric_ladder(0.2, 6)
    vals = [potential_cutoff([0.0, 0.0], disk, e) for e in eps]
    res = extrapolate(zip(eps, vals), DivergenceModel((0, 1, 2)))
    assert res.value == pytest.approx(-np.pi, abs=1e-8)


def test_ladder_validation():
    eps = geometric_ladder(1.0, 3)
    with pytest.raises(ExtrapolationError):
        extrapolate(zip(eps, eps), DivergenceModel((0,)))
    eps = np.array([1.0, 0.8, 0.6, 0.5])
    with pytest.raises(ExtrapolationError, match="factor of 8"):
        extrapolate(zip(eps, eps), DivergenceModel((0,)))
    with pytest.raises(ExtrapolationError):
        extrapolate([(1.0, 1.0), (1.0, 1.0), (0.1, 1.0), (0.01, 1.0)], DivergenceModel((0,)))


def test_ill_conditioned_fit_raises():
    eps = geometric_ladder(1.0, 8, ratio=0.9) * 1e-3 + 1.0
    eps = np.concatenate([eps, [0.1]])
    with pytest.raises(ExtrapolationError, match="condition"):
        extrapolate(zip(eps, eps), DivergenceModel((-2, -1, 0, 1, 2, 3)), max_cond=1e6)


def test_model_validation():
    with pytest.raises(ValueError):
        DivergenceModel((1, 2))
    with pytest.raises(ValueError):
        DivergenceModel((0, 1), {0: 1.0})


def test_error_estimate_and_serialization():
    eps = geometric_ladder(0.4, 6)
    vals = 1 + 0.3 * eps**3
    res = extrapolate(zip(eps, vals), DivergenceModel((0, 1, 2)))
    assert res.error_estimate > 0
    assert abs(res.value - 1) < 10 * res.error_estimate + 1e-12
    d = res.to_dict()
    assert set(d) >= {"value", "residual", "ladder", "error_estimate"}
    assert len(d["ladder"]) == 6


def test_fit_coefficients_diagnostic():
    eps = geometric_ladder(0.5, 7)
    got = fit_coefficients(eps, 2 / eps**2 - 3 / eps + 4 + 5 * eps, [-2, -1, 0, 1])
    for k, v in {-2: 2, -1: -3, 0: 4, 1: 5}.items():
        assert got[k] == pytest.approx(v, rel=1e-8)


@given(
    c=st.lists(st.floats(-10, 10), min_size=4, max_size=4),
    largest=st.floats(0.01, 1.0),
)
def test_exact_model_data_recovered(c, largest):
    eps = geometric_ladder(largest, 7)
    vals = c[0] / eps + c[1] + c[2] * eps + c[3] * eps**2
    res = extrapolate(zip(eps, vals), DivergenceModel((-1, 0, 1, 2)))
    scale = max(1.0, abs(c[0]) / eps[-1])
    assert abs(res.value - c[1]) < 1e-9 * scale


@given(shift=st.floats(-100, 100))
def test_ordering_of_samples_irrelevant(shift):
    eps = geometric_ladder(0.5, 6)
    vals = shift + eps
    a = extrapolate(zip(eps, vals), DivergenceModel((0, 1)))
    b = extrapolate(zip(eps[::-1], vals[::-1]), DivergenceModel((0, 1)))
    assert a.value == b.value
