import os

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from moebius_energy.curves import ClosedCurve, PlanarDomain

settings.register_profile(
    "default",
    max_examples=25,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.function_scoped_fixture],
)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

PI2 = np.pi**2


@pytest.fixture(scope="session")
def circle():
    return ClosedCurve.circle(1.0)


@pytest.fixture(scope="session")
def circle3():
    return ClosedCurve.circle(1.0, (0, 0, 0), (0, 0, 1))


@pytest.fixture(scope="session")
def disk():
    return PlanarDomain.disk(1.0)


@pytest.fixture(scope="session")
def ellipse():
    return ClosedCurve.ellipse(2.0, 1.0)


@pytest.fixture(scope="session")
def ellipse_domain(ellipse):
    return PlanarDomain(ellipse)


@pytest.fixture(scope="session")
def trefoil():
    return ClosedCurve.trefoil()
