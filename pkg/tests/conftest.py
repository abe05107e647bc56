import numpy as np
import pytest

from flateta.bundle import BundleMetric, FlatBundle, flat_connection
from flateta.geometry import make_torus_grid
from flateta.runner.selftest import random_trig_form, t3_example_bundle

W_CANON = 0.3 + 0.25j


@pytest.fixture(scope="session")
def circle():
    return make_torus_grid(1, 64)


@pytest.fixture(scope="session")
def torus():
    return make_torus_grid(3, 12)


@pytest.fixture(scope="session")
def canonical_bundle(circle):
    """Rank-1 circle bundle with w = 0.3+0.25i and the trivial metric."""
    return FlatBundle(flat_connection(circle, [[[W_CANON]]]), BundleMetric.identity(circle, 1))


@pytest.fixture(scope="session")
def varying_metric_bundle(circle):
    """Same flat connection, metric 2 + 0.5 cos(theta)."""
    g = BundleMetric.harmonic(circle, [[2.0]], {(0, "cos"): [[0.5]]})
    return FlatBundle(flat_connection(circle, [[[W_CANON]]]), g)


@pytest.fixture(scope="session")
def diagonal_bundle(circle):
    w = np.diag([0.3 + 0.25j, -0.2 + 0.1j])
    g = BundleMetric.harmonic(circle, np.diag([1.0, 2.0]), {(0, "cos"): np.diag([0.3, 0.5])})
    return FlatBundle(flat_connection(circle, [w]), g)


@pytest.fixture(scope="session")
def t3_bundle():
    return t3_example_bundle(16)


@pytest.fixture(scope="session")
def t3_fine_bundle():
    """The T^3 example at a resolution where g^{-1} is resolved to ~1e-13."""
    return t3_example_bundle(32)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def trig_form(rng):
    def make(manifold, degree, rank=1, max_mode=3):
        return random_trig_form(manifold, degree, rank, rng, max_mode)

    return make
