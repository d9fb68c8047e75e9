"""Shared geometry fixtures; session-scoped to amortize the arc-length work."""

import pytest

from robin_asym import geometry


@pytest.fixture(scope="session")
def circle_alc():
    return geometry.reparametrize_arclength(geometry.circle(1.0, samples=256), 512)


@pytest.fixture(scope="session")
def circle_cp(circle_alc):
    return geometry.signed_curvature(circle_alc)


@pytest.fixture(scope="session")
def ellipse_curve():
    return geometry.ellipse(1.5, 1.0, samples=512)


@pytest.fixture(scope="session")
def ellipse_alc(ellipse_curve):
    return geometry.reparametrize_arclength(ellipse_curve, 1024)


@pytest.fixture(scope="session")
def ellipse_cp(ellipse_alc):
    return geometry.signed_curvature(ellipse_alc)


@pytest.fixture(scope="session")
def perturbed_alc():
    return geometry.reparametrize_arclength(geometry.perturbed_circle(0.12, 3), 1024)


@pytest.fixture(scope="session")
def perturbed_cp(perturbed_alc):
    return geometry.signed_curvature(perturbed_alc)
