"""Analytic continuation of eta defects from real to complex deformation.

Real-``r`` defects are only known modulo ``Z``.  They are unwrapped along
the sampled ``r`` path starting from the canonical anchor ``defect(0) = 0``,
then fitted by an odd polynomial of degree at most ``dim M``.  Evaluating
that polynomial off the real axis is the continuation.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.exceptions import NotFittedError

from ._validation import check_complex_vector, check_positive_int, check_real_vector
from .spectral import ModC

__all__ = [
    "ContinuationWarning",
    "HoloFit",
    "OddPolynomialContinuation",
    "lift_defects",
    "holo_fit",
]


class ContinuationWarning(UserWarning):
    """The fitted polynomial does not reproduce the samples within tolerance."""


def _as_modc(values):
    return [v if isinstance(v, ModC) else ModC(v) for v in values]


def lift_defects(r, defects, anchor_tol=1e-9):
    """Unwrap C/Z defects into complex numbers continuous along ``r``.

    ``r`` must contain 0 and the defect there must vanish mod Z.
    Consecutive samples (in sorted ``r``) must differ by less than 1/2 in
    real part, otherwise the branch cannot be followed.
    """
    r = check_real_vector(r, "r")
    defects = _as_modc(defects)
    if len(defects) != len(r):
        raise ValueError("r and defects differ in length")
    order = np.argsort(r, kind="stable")
    zero_hits = np.flatnonzero(r[order] == 0.0)
    if zero_hits.size == 0:
        raise ValueError("sample grid must contain r = 0 as the lifting anchor")
    start = int(zero_hits[0])
    if defects[order[start]].distance(ModC(0)) > anchor_tol:
        raise ValueError("defect at r = 0 is not 0 mod Z")
    lifted = np.empty(len(r), dtype=complex)
    lifted[order[start]] = complex(0.0, defects[order[start]].imag)
    for step in (1, -1):
        prev = lifted[order[start]]
        pos = start + step
        while 0 <= pos < len(r):
            idx = order[pos]
            value = defects[idx].lift(prev)
            if abs(value.real - prev.real) >= 0.5 - 1e-12:
                raise ValueError(
                    f"defect jumps by >= 1/2 between neighbouring samples near r = {r[idx]:g}; refine the grid"
                )
            lifted[idx] = value
            prev = value
            pos += step
    return lifted


class OddPolynomialContinuation(BaseEstimator):
    """Least-squares odd polynomial ``sum_j b_j r^{2j+1}`` through lifted defects.

    Parameters
    ----------
    degree_bound : int, default=1
        Highest admissible degree (the manifold dimension).
    residual_tol : float, default=1e-9
        Fits whose max residual exceeds this are flagged as ill-conditioned.

    Attributes
    ----------
    coef_ : ndarray of complex, shape (n_terms,)
        ``coef_[j]`` multiplies ``r^{2j+1}``.
    residual_ : float
        Max absolute residual on the training samples.
    well_conditioned_ : bool
    """

    def __init__(self, degree_bound=1, residual_tol=1e-9):
        self.degree_bound = degree_bound
        self.residual_tol = residual_tol

    def _design(self, r):
        n_terms = (self.degree_bound + 1) // 2
        return np.stack([np.asarray(r, dtype=complex) ** (2 * j + 1) for j in range(n_terms)], axis=-1)

    def fit(self, r, defects):
        check_positive_int(self.degree_bound, "degree_bound")
        r = check_real_vector(r, "r")
        if len(r) < self.degree_bound + 2:
            raise ValueError(f"need at least {self.degree_bound + 2} samples, got {len(r)}")
        if defects is not None and len(defects) and isinstance(defects[0], ModC):
            y = lift_defects(r, defects)
        else:
            y = check_complex_vector(defects, "defects")
        X = self._design(r)
        coef, *_ = np.linalg.lstsq(X, y, rcond=None)
        self.coef_ = coef
        self.residual_ = float(np.max(np.abs(X @ coef - y), initial=0.0))
        self.condition_ = float(np.linalg.cond(X)) if X.shape[1] else 1.0
        self.well_conditioned_ = bool(self.residual_ <= self.residual_tol and np.isfinite(self.condition_))
        if not self.well_conditioned_:
            warnings.warn(
                f"odd polynomial fit residual {self.residual_:.3e} exceeds {self.residual_tol:.1e}",
                ContinuationWarning,
                stacklevel=2,
            )
        return self

    def predict(self, r):
        if not hasattr(self, "coef_"):
            raise NotFittedError("call fit before predict")
        r = check_complex_vector(r, "r")
        return self._design(r) @ self.coef_


@dataclass(frozen=True)
class HoloFit:
    coefficients: np.ndarray
    residual: float
    well_conditioned: bool
    model: OddPolynomialContinuation

    def evaluate(self, r):
        return complex(self.model.predict([r])[0])


def holo_fit(samples, degree_bound=1, residual_tol=1e-9):
    """Fit ``[(r, defect), ...]`` with defects in ``C/Z``; see :class:`OddPolynomialContinuation`."""
    samples = list(samples)
    r = [s[0] for s in samples]
    defects = _as_modc([s[1] for s in samples])
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ContinuationWarning)
        model = OddPolynomialContinuation(degree_bound, residual_tol).fit(r, defects)
    return HoloFit(model.coef_.copy(), model.residual_, model.well_conditioned_, model)
