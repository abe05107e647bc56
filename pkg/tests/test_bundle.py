import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from flateta.bundle import (
    BundleMetric,
    Connection,
    FlatBundle,
    adjoint_connection,
    curvature,
    deform,
    flat_connection,
    holonomy,
    metric_compatibility_defect,
    omega_form,
    unitarize,
)
from flateta.geometry import Form, make_torus_grid

from conftest import W_CANON


def _coef(conn):
    return conn.constant_matrices()[0][0, 0]


def test_omega_canonical_example(canonical_bundle):
    omega = canonical_bundle.omega()
    assert np.allclose(omega.component((0,)), -0.6, atol=1e-15)


def test_omega_vanishes_for_unitary_connection(torus):
    X = np.array([[1j, 0.5], [-0.5, -2j]])
    conn = flat_connection(torus, [X, 0.3j * np.eye(2), np.zeros((2, 2))])
    assert omega_form(conn, BundleMetric.identity(torus, 2)).max_abs() <= 1e-12


def test_omega_vanishes_for_trivial_connection_and_constant_metric(torus):
    g = BundleMetric.constant(torus, [[2.0, 0.5j], [-0.5j, 1.0]])
    conn = flat_connection(torus, [np.zeros((2, 2))] * 3)
    assert omega_form(conn, g).max_abs() == 0.0


def test_omega_rank_mismatch(circle):
    conn = flat_connection(circle, [np.eye(2)])
    with pytest.raises(ValueError, match="rank"):
        omega_form(conn, BundleMetric.identity(circle, 1))


def test_adjoint_canonical_example(canonical_bundle):
    adj = adjoint_connection(canonical_bundle.connection, canonical_bundle.metric)
    assert np.isclose(_coef(adj), -0.3 + 0.25j, atol=1e-15)


def test_adjoint_of_unitary_is_itself(circle):
    conn = flat_connection(circle, [[[0.7j]]])
    adj = adjoint_connection(conn, BundleMetric.identity(circle, 1))
    assert (adj.coefficient - conn.coefficient).max_abs() == 0.0


def test_adjoint_involution(t3_bundle):
    conn, g = t3_bundle.connection, t3_bundle.metric
    twice = adjoint_connection(adjoint_connection(conn, g), g)
    assert (twice.coefficient - conn.coefficient).max_abs() <= 1e-11


def test_adjoint_is_flat():
    from flateta.runner.selftest import t3_example_bundle

    # resolution where aliasing of g^{-1} is well below the bound
    b = t3_example_bundle(32)
    adj = adjoint_connection(b.connection, b.metric)
    assert curvature(adj).max_abs() <= 1e-9


def test_unitarize_canonical_example(canonical_bundle):
    assert np.isclose(_coef(canonical_bundle.unitarized()), 0.25j, atol=1e-15)


def test_unitarize_unitary_is_identity(circle):
    conn = flat_connection(circle, [[[0.4j]]])
    out = unitarize(conn, BundleMetric.identity(circle, 1))
    assert np.isclose(_coef(out), 0.4j)


@pytest.mark.parametrize("fixture", ["canonical_bundle", "varying_metric_bundle", "diagonal_bundle", "t3_bundle"])
def test_metric_preservation(fixture, request):
    b = request.getfixturevalue(fixture)
    assert metric_compatibility_defect(b.unitarized(), b.metric).max_abs() <= 1e-10
    for r in (-2.0, -0.5, 0.7, 3.0):
        assert metric_compatibility_defect(b.deformed(r), b.metric).max_abs() <= 1e-10


def test_complex_r_breaks_metric_preservation(canonical_bundle):
    assert metric_compatibility_defect(canonical_bundle.deformed(1j), canonical_bundle.metric).max_abs() > 0.1


def test_deform_examples(canonical_bundle):
    b = canonical_bundle
    assert (b.deformed(0.0).coefficient - b.unitarized().coefficient).max_abs() == 0.0
    assert np.isclose(_coef(b.deformed(1j)), W_CANON, atol=1e-12)
    assert np.isclose(_coef(b.deformed(2.0)), 1j * (0.25 - 0.6), atol=1e-15)


@pytest.mark.parametrize("fixture", ["varying_metric_bundle", "diagonal_bundle", "t3_bundle"])
def test_deformation_endpoint(fixture, request):
    b = request.getfixturevalue(fixture)
    assert (b.deformed(1j).coefficient - b.connection.coefficient).max_abs() <= 1e-12


def test_deform_rejects_mismatch(canonical_bundle, torus):
    with pytest.raises(ValueError):
        deform(canonical_bundle.unitarized(), Form.zero(torus), 1.0)


def test_omega_g_self_adjoint(t3_bundle, varying_metric_bundle):
    for b in (t3_bundle, varying_metric_bundle):
        gw = b.omega().left_matmul(b.metric.values)
        assert (gw - gw.dagger()).max_abs() <= 1e-11


def test_flat_connection_curvature(t3_bundle):
    assert curvature(t3_bundle.connection).max_abs() <= 1e-10


def test_curvature_hand_example(torus):
    """A = f(th1) X dth2 gives dA = f'(th1) X dth1^dth2 and A^A = 0."""
    X = np.array([[0.0, 1.0], [2.0, 0.5j]])
    th1 = torus.coords()[0]
    f = np.sin(th1) + 0.3 * np.cos(2 * th1)
    fp = np.cos(th1) - 0.6 * np.sin(2 * th1)
    A = Form(torus, 2, {(1,): f[..., None, None] * X})
    F = curvature(Connection(A))
    assert F.degrees == [2]
    assert np.max(np.abs(F.component((0, 1)) - fp[..., None, None] * X)) <= 1e-12


def test_deformed_connection_is_not_flat_on_t3(t3_bundle):
    assert curvature(t3_bundle.deformed(0.7)).max_abs() > 1e-3


def test_flat_connection_rejects_noncommuting(torus):
    X = np.array([[0, 1], [0, 0]], dtype=complex)
    Y = np.array([[0, 0], [1, 0]], dtype=complex)
    with pytest.raises(ValueError):
        flat_connection(torus, [X, Y, np.zeros((2, 2))])


def test_connection_flat_flag_is_checked(torus):
    th1 = torus.coords()[0]
    A = Form(torus, 1, {(1,): np.sin(th1)[..., None, None] * np.ones((1, 1))})
    with pytest.raises(ValueError, match="curvature"):
        Connection(A, flat=True)


def test_metric_validation(circle):
    with pytest.raises(ValueError, match="Hermitian"):
        BundleMetric.constant(circle, [[1.0, 0.5], [0.2, 1.0]])
    with pytest.raises(ValueError):
        BundleMetric.constant(circle, [[1.0, 0.0], [0.0, -1.0]])
    with pytest.raises(ValueError):
        BundleMetric.constant(circle, [[1e-12]])


def test_holonomy_examples(circle, torus):
    zero = flat_connection(torus, [np.zeros((2, 2))] * 3)
    assert np.allclose(holonomy(zero, 1), np.eye(2))
    conn = flat_connection(circle, [[[W_CANON]]])
    assert np.isclose(holonomy(conn)[0, 0], np.exp(-2 * math.pi * W_CANON), rtol=1e-13)
    U = np.array([[0.3j, 0.5], [-0.5, -1.1j]])
    H = holonomy(flat_connection(circle, [U]))
    assert np.allclose(H.conj().T @ H, np.eye(2), atol=1e-12)


def test_holonomy_of_nonconstant_circle_connection_is_gauge_invariant(varying_metric_bundle):
    """The unitarized connection with a varying metric is non-constant but
    gauge equivalent to a constant one: its holonomy is exp(-2 pi * 0.25i)."""
    H = holonomy(varying_metric_bundle.unitarized())
    assert np.isclose(H[0, 0], np.exp(-2j * math.pi * 0.25), atol=1e-10)


@settings(max_examples=20, deadline=None)
@given(
    w=st.complex_numbers(max_magnitude=2, allow_nan=False, allow_infinity=False),
    g0=st.floats(0.5, 3.0),
    amp=st.floats(-0.4, 0.4),
    r=st.floats(-3, 3),
)
def test_unitarized_and_real_deformations_preserve_metric(w, g0, amp, r):
    m = make_torus_grid(1, 32)
    g = BundleMetric.harmonic(m, [[g0]], {(0, "sin"): [[amp]]})
    b = FlatBundle(flat_connection(m, [[[w]]]), g)
    assert metric_compatibility_defect(b.deformed(r), g).max_abs() <= 1e-10
    assert (b.deformed(1j).coefficient - b.connection.coefficient).max_abs() <= 1e-12
