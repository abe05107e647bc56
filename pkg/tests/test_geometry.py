import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from flateta.geometry import (
    Form,
    GridManifold,
    a_hat_form,
    basis_form,
    exterior_d,
    form_exp,
    integrate_top,
    make_torus_grid,
    pair_cycles,
    phi,
    wedge,
)
from flateta.runner.selftest import random_trig_form

TWO_PI = 2 * math.pi


def test_make_torus_grid_shapes():
    assert make_torus_grid(1, 64).shape == (64,)
    t3 = make_torus_grid(3, 16)
    assert t3.shape == (16, 16, 16)
    assert np.isclose(t3.spacing, TWO_PI / 16)


@pytest.mark.parametrize("dim,res,match", [
    (2, 16, "even-dimensional manifold"),
    (4, 16, "even-dimensional manifold"),
    (5, 16, "unsupported"),
    (1, 7, "even"),
    (1, 2, ">= 4"),
])
def test_make_torus_grid_rejects(dim, res, match):
    with pytest.raises(ValueError, match=match):
        make_torus_grid(dim, res)


def test_wedge_basis_forms(torus):
    d12 = wedge(basis_form(torus, 0), basis_form(torus, 1))
    assert d12.degrees == [2]
    assert np.allclose(d12.scalar_field((0, 1)), 1.0)
    assert wedge(basis_form(torus, 0), basis_form(torus, 0)).max_abs() == 0.0
    # reversed order picks up the sign
    d21 = wedge(basis_form(torus, 1), basis_form(torus, 0))
    assert np.allclose(d21.scalar_field((0, 1)), -1.0)


def test_wedge_truncates_above_dimension(circle):
    d = basis_form(circle, 0)
    assert wedge(d, d).max_abs() == 0.0


def test_wedge_rejects_mismatch(circle, torus):
    with pytest.raises(ValueError):
        wedge(basis_form(circle, 0), basis_form(torus, 0))
    a = Form.constant(torus, np.eye(2))
    b = Form.constant(torus, np.eye(3))
    with pytest.raises(ValueError):
        wedge(a, b)


def test_graded_commutativity(torus, trig_form):
    a, b = trig_form(torus, 1), trig_form(torus, 1)
    assert (wedge(a, b) + wedge(b, a)).max_abs() <= 1e-14 * max(1.0, wedge(a, b).max_abs())
    c = trig_form(torus, 2)
    assert (wedge(a, c) - wedge(c, a)).max_abs() <= 1e-12


def test_wedge_associativity(torus, trig_form):
    a, b, c = (trig_form(torus, 1, rank=2, max_mode=1) for _ in range(3))
    lhs = wedge(wedge(a, b), c)
    scale = max(1.0, lhs.max_abs())
    assert (lhs - wedge(a, wedge(b, c))).max_abs() <= 1e-12 * scale


def test_exterior_d_examples(circle):
    assert exterior_d(Form.constant(circle, 3.0)).max_abs() == 0.0
    f = Form.from_function(circle, lambda th: np.sin(th))
    df = exterior_d(f)
    (theta,) = circle.coords()
    assert np.max(np.abs(df.scalar_field((0,)) - np.cos(theta))) <= 1e-12
    # top degree maps to zero
    assert exterior_d(df).max_abs() == 0.0


@pytest.mark.parametrize("dim,res", [(1, 32), (3, 12)])
def test_d_squared_vanishes(dim, res, trig_form):
    m = make_torus_grid(dim, res)
    for degree in range(dim):
        a = trig_form(m, degree, rank=2)
        assert exterior_d(exterior_d(a)).max_abs() <= 1e-10


@pytest.mark.parametrize("dim,res", [(1, 32), (3, 12)])
def test_stokes(dim, res, trig_form):
    m = make_torus_grid(dim, res)
    b = trig_form(m, dim - 1)
    assert abs(integrate_top(exterior_d(b))) <= 1e-10


def test_integrate_top_examples(circle, torus):
    assert np.isclose(integrate_top(basis_form(circle, 0)), TWO_PI, atol=1e-14)
    vol = wedge(wedge(basis_form(torus, 0), basis_form(torus, 1)), basis_form(torus, 2))
    assert np.isclose(integrate_top(vol), TWO_PI**3, rtol=1e-14)
    cos_form = Form.from_function(circle, lambda th: np.cos(th), key=(0,))
    assert abs(integrate_top(cos_form)) <= 1e-14


def test_integrate_top_traces_matrices(circle):
    a = Form.constant(circle, np.diag([1.0, 2.0]), key=(0,))
    assert np.isclose(integrate_top(a), 3 * TWO_PI)


def test_pair_cycles_examples(circle, torus):
    p = pair_cycles(basis_form(circle, 0))
    assert len(p) == 1 and np.allclose(p.values, [TWO_PI])
    p3 = pair_cycles(basis_form(torus, 0))
    assert len(p3) == 4
    assert np.allclose(p3.values, [TWO_PI**3, 0, 0, 0], atol=1e-10)
    p3b = pair_cycles(basis_form(torus, 1))
    assert np.allclose(p3b.values, [0, TWO_PI**3, 0, 0], atol=1e-10)


@pytest.mark.parametrize("dim,res", [(1, 32), (3, 12)])
def test_pair_cycles_vanish_on_exact_forms(dim, res, trig_form):
    m = make_torus_grid(dim, res)
    f = trig_form(m, 0)
    assert pair_cycles(exterior_d(f)).max_abs() <= 1e-10
    if dim == 3:
        g = trig_form(m, 2)
        assert pair_cycles(exterior_d(g)).max_abs() <= 1e-10


def test_form_exp_of_zero_is_identity(torus):
    out = form_exp(Form.zero(torus, 3))
    assert np.allclose(out.component(()), np.eye(3))
    assert out.degrees == [0]


def test_form_exp_nilpotent_two_form(torus, trig_form):
    F = trig_form(torus, 2, rank=2, max_mode=1)
    out = form_exp(F)
    expected = Form.constant(torus, np.eye(2)) + F
    assert (out - expected).max_abs() <= 1e-14


def _eig_expm(x):
    vals, vecs = np.linalg.eig(x)
    return vecs @ (np.exp(vals)[..., None] * np.linalg.inv(vecs))


def test_form_exp_matches_eigendecomposition(circle, trig_form):
    x = trig_form(circle, 0, rank=3, max_mode=2) * 0.3
    out = form_exp(x).component(())
    oracle = _eig_expm(x.component(()))
    assert np.max(np.abs(out - oracle)) <= 1e-12 * max(1.0, np.max(np.abs(oracle)))


def test_form_exp_mixed_degree_series(torus):
    """exp(X + N) with commuting constant X and N is e^X (1 + N)."""
    X = Form.constant(torus, 0.4 * np.eye(2))
    N = Form.constant(torus, np.array([[0.0, 1.0], [0.0, 0.0]]), key=(0, 2))
    out = form_exp(X + N)
    assert np.allclose(out.component(()), np.exp(0.4) * np.eye(2))
    assert np.allclose(out.component((0, 2)), np.exp(0.4) * np.array([[0, 1], [0, 0]]))


def test_form_exp_rejects_odd_degree(circle):
    with pytest.raises(ValueError):
        form_exp(basis_form(circle, 0))


def test_phi_scales_by_degree(torus):
    a = Form.constant(torus, 1.0) + wedge(basis_form(torus, 0), basis_form(torus, 1))
    root = np.sqrt(TWO_PI * 1j)
    out = phi(a)
    assert np.allclose(out.scalar_field(()), 1.0)
    assert np.allclose(out.scalar_field((0, 1)), root**-2)
    # even degrees do not see the branch
    assert (phi(a, branch=-1) - out).max_abs() == 0.0


def test_a_hat_of_flat_metric_is_one(torus, circle):
    for m in (circle, torus):
        assert (a_hat_form(Form.zero(m, 4)) - Form.constant(m, 1.0)).max_abs() == 0.0


def test_a_hat_rejects_non_antisymmetric(torus):
    R = Form.constant(torus, np.ones((2, 2)), key=(0, 1))
    with pytest.raises(ValueError, match="antisymmetric"):
        a_hat_form(R)


def test_a_hat_degree_four_against_hand_expansion():
    """On a 4-dim auxiliary grid, R = J (a dth1^dth2 + b dth3^dth4), J = E12 - E21.

    R^R = 2ab J^2 dth1234 and Tr J^2 = -2, so Tr R^2 = -4ab dth1234 and
    p1 = phi(Tr R^2)/2 = -2ab / (2 pi i)^2 = ab / (2 pi^2).  The degree-4
    part of A-hat is -p1/24 = -ab / (48 pi^2); p1^2 and p2 are degree 8.
    """
    m = GridManifold(4, 4)
    a, b = 0.7, -1.3
    J = np.zeros((4, 4))
    J[0, 1], J[1, 0] = 1.0, -1.0
    R = Form.constant(m, a * J, key=(0, 1)) + Form.constant(m, b * J, key=(2, 3))
    out = a_hat_form(R)
    assert np.allclose(out.scalar_field(()), 1.0)
    expected = -a * b / (48 * math.pi**2)
    assert np.allclose(out.scalar_field((0, 1, 2, 3)), expected, rtol=1e-13, atol=0)


def test_a_hat_orthogonal_blocks_have_no_p1():
    m = GridManifold(4, 4)
    J12 = np.zeros((4, 4))
    J12[0, 1], J12[1, 0] = 1.0, -1.0
    J34 = np.zeros((4, 4))
    J34[2, 3], J34[3, 2] = 1.0, -1.0
    R = Form.constant(m, J12, key=(0, 1)) + Form.constant(m, J34, key=(2, 3))
    assert np.max(np.abs(a_hat_form(R).scalar_field((0, 1, 2, 3)))) == 0.0


def test_a_hat_truncates_on_model_tori(torus):
    J = np.array([[0.0, 1.0], [-1.0, 0.0]])
    R = Form.constant(torus, J, key=(0, 1))
    out = a_hat_form(R)
    assert out.degrees == [0]
    assert np.allclose(out.scalar_field(()), 1.0)


@settings(max_examples=25, deadline=None)
@given(
    coeffs=st.lists(st.complex_numbers(max_magnitude=3, allow_nan=False, allow_infinity=False), min_size=3, max_size=3),
    modes=st.lists(st.integers(-4, 4), min_size=3, max_size=3),
)
def test_d_of_trig_polynomial_matches_calculus(coeffs, modes):
    m = make_torus_grid(1, 16)
    (theta,) = m.coords()
    f = sum(c * np.exp(1j * k * theta) for c, k in zip(coeffs, modes))
    df = sum(1j * k * c * np.exp(1j * k * theta) for c, k in zip(coeffs, modes))
    out = exterior_d(Form(m, 1, {(): f[..., None, None]})).scalar_field((0,))
    assert np.max(np.abs(out - df), initial=0.0) <= 1e-11


@settings(max_examples=15, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_wedge_is_bilinear(seed):
    m = make_torus_grid(3, 8)
    rng = np.random.default_rng(seed)
    a, b, c = (random_trig_form(m, 1, 1, rng, max_mode=2) for _ in range(3))
    lhs = wedge(a + b * 2.0, c)
    rhs = wedge(a, c) + wedge(b, c) * 2.0
    assert (lhs - rhs).max_abs() <= 1e-11
