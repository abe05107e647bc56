import warnings

import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from flateta.continuation import ContinuationWarning, OddPolynomialContinuation, holo_fit, lift_defects
from flateta.spectral import ModC, eta_defect

R_SAMPLES = (0.0, 0.5, -0.5, 1.0, -1.0)


def test_holo_fit_canonical(canonical_bundle):
    samples = [(r, eta_defect(canonical_bundle, 1, r)) for r in R_SAMPLES]
    fit = holo_fit(samples, degree_bound=1)
    assert fit.residual <= 1e-9 and fit.well_conditioned
    assert abs(fit.coefficients[0] - 0.3) <= 1e-12
    continued = fit.evaluate(1j)
    assert abs(continued - 0.3j) <= 1e-12
    assert eta_defect(canonical_bundle, 1, 1j).distance(ModC(continued)) <= 1e-8


def test_holo_fit_all_zero():
    fit = holo_fit([(r, ModC(0)) for r in R_SAMPLES])
    assert np.all(fit.coefficients == 0)
    assert fit.evaluate(1j) == 0


def test_lift_follows_wraps():
    r = np.linspace(-3, 3, 25)
    true = 0.45 * r
    lifted = lift_defects(r, [ModC(v) for v in true])
    assert np.allclose(lifted, true, atol=1e-12)


def test_lift_requires_anchor():
    with pytest.raises(ValueError, match="r = 0"):
        lift_defects([0.5, 1.0], [ModC(0.1), ModC(0.2)])
    with pytest.raises(ValueError, match="not 0 mod Z"):
        lift_defects([0.0, 1.0], [ModC(0.3), ModC(0.2)])


def test_lift_rejects_coarse_grid():
    with pytest.raises(ValueError, match="refine"):
        lift_defects([0.0, 1.0], [ModC(0.0), ModC(0.5)])


def test_ill_conditioned_fit_is_flagged():
    samples = [(r, ModC(0.1 * r**2)) for r in R_SAMPLES]
    fit = holo_fit(samples)
    assert not fit.well_conditioned
    assert fit.residual > 1e-3
    with pytest.warns(ContinuationWarning):
        OddPolynomialContinuation().fit([s[0] for s in samples], [s[1] for s in samples])


def test_cubic_term_recovered_on_three_dimensions():
    r = np.array([0.0, 0.3, -0.3, 0.6, -0.6, 0.9])
    y = 0.2 * r - 0.05 * r**3
    model = OddPolynomialContinuation(degree_bound=3).fit(r, y)
    assert np.allclose(model.coef_, [0.2, -0.05], atol=1e-12)
    assert model.predict([1j])[0] == pytest.approx(0.2j + 0.05j)


def test_estimator_contract():
    est = OddPolynomialContinuation(degree_bound=3, residual_tol=1e-6)
    assert est.get_params() == {"degree_bound": 3, "residual_tol": 1e-6}
    cloned = clone(est)
    assert cloned.get_params() == est.get_params()
    with pytest.raises(NotFittedError):
        est.predict([0.5])
    with pytest.raises(ValueError, match="samples"):
        est.fit([0.0, 1.0], [0.0, 0.1])


def test_fit_returns_self():
    est = OddPolynomialContinuation()
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        assert est.fit([0.0, 1.0, -1.0], [0.0, 0.3, -0.3]) is est
