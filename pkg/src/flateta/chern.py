"""Chern-Weil and Chern-Simons forms for the deformation family.

All forms here are scalar (rank 1) after the fiber trace.  The
``branch`` argument selects the square root of ``2 pi sqrt(-1)`` used by
:func:`flateta.geometry.phi`; every quantity returned below combines it
into even powers, so results do not depend on it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from ._validation import check_complex_scalar, check_positive_int
from .bundle import curvature
from .geometry import TWO_PI, Form, exterior_d, form_exp, integrate_top, phi, wedge, wedge_power

__all__ = [
    "ACoeffTable",
    "DefectPrediction",
    "chern_character",
    "odd_chern_form",
    "a_coeff",
    "a_coeff_exact",
    "a_coeff_table",
    "central_binomial_ratio",
    "linear_path",
    "bent_path",
    "cs_transgression",
    "cs_series",
    "defect_rhs",
    "imaginary_eta_prediction",
]


def _root(branch):
    if branch not in (1, -1):
        raise ValueError("branch must be +1 or -1")
    return branch * np.sqrt(TWO_PI * 1j)


def chern_character(conn, branch=1):
    """``phi Tr exp(-F)`` for the curvature ``F`` of ``conn``."""
    F = curvature(conn)
    return phi(form_exp(-F), branch).trace()


def odd_chern_form(omega, j, branch=1):
    """``(2 pi sqrt(-1))^{-j} 2^{-(2j+1)} Tr[omega^{2j+1}]``.

    Returns the zero form when ``2j + 1`` exceeds the manifold dimension.
    """
    j = check_positive_int(j, "j", minimum=0)
    if any(d != 1 for d in omega.degrees):
        raise ValueError("omega must be a matrix 1-form")
    m = omega.manifold
    if 2 * j + 1 > m.dim:
        return Form.zero(m)
    # (2 pi i)^{-j} written through the chosen root keeps the branch explicit
    prefactor = _root(branch) ** (-2 * j) * 2.0 ** (-(2 * j + 1))
    return wedge_power(omega, 2 * j + 1).trace() * prefactor


# a_j(r) = int_0^1 (1 + u^2 r^2)^j du = sum_k C(j, k) r^{2k} / (2k + 1)


@dataclass(frozen=True)
class ACoeffTable:
    """Exact rational coefficients of ``a_j`` as polynomials in ``r^2``.

    ``coefficients[j][k]`` multiplies ``r^{2k}``.
    """

    jmax: int
    coefficients: tuple

    def polynomial(self, j):
        return self.coefficients[j]

    def evaluate_exact(self, j, r_squared):
        """Exact value for a rational (or Gaussian-rational) ``r^2``.

        ``r_squared`` is a :class:`~fractions.Fraction` or a pair
        ``(real, imag)`` of fractions; the result has the same form.
        """
        if isinstance(r_squared, tuple):
            re, im = Fraction(r_squared[0]), Fraction(r_squared[1])
            acc_re, acc_im = Fraction(0), Fraction(0)
            pow_re, pow_im = Fraction(1), Fraction(0)
            for c in self.coefficients[j]:
                acc_re += c * pow_re
                acc_im += c * pow_im
                pow_re, pow_im = pow_re * re - pow_im * im, pow_re * im + pow_im * re
            return acc_re, acc_im
        x = Fraction(r_squared)
        return sum((c * x**k for k, c in enumerate(self.coefficients[j])), Fraction(0))

    def __call__(self, j, r):
        return a_coeff(j, r)


def a_coeff_table(jmax):
    jmax = check_positive_int(jmax, "jmax", minimum=0)
    rows = tuple(
        tuple(Fraction(math.comb(j, k), 2 * k + 1) for k in range(j + 1)) for j in range(jmax + 1)
    )
    return ACoeffTable(jmax, rows)


def a_coeff_exact(j, r):
    """``a_j(r)`` as a pair of Fractions, exact for the float value of ``r^2``."""
    r = check_complex_scalar(r, "r")
    r2 = r * r
    table = a_coeff_table(j)
    return table.evaluate_exact(j, (Fraction(r2.real), Fraction(r2.imag)))


def a_coeff(j, r):
    """``a_j(r) = int_0^1 (1 + u^2 r^2)^j du`` by the binomial closed form.

    The polynomial is summed in exact rational arithmetic and rounded once,
    which avoids cancellation for imaginary ``r`` and large ``j``.
    """
    j = check_positive_int(j, "j", minimum=0)
    re, im = a_coeff_exact(j, r)
    return complex(float(re), float(im))


def central_binomial_ratio(j):
    """``2^{2j} (j!)^2 / (2j+1)! = a_j(sqrt(-1))`` as a Fraction."""
    j = check_positive_int(j, "j", minimum=0)
    return Fraction(4**j * math.factorial(j) ** 2, math.factorial(2 * j + 1))


# Chern-Simons transgression


def linear_path(conn0, conn1):
    """``A_t = (1-t) A_0 + t A_1``; returns ``t -> (A_t, dA_t/dt)``."""
    A0 = conn0.coefficient
    delta = conn1.coefficient - A0

    def path(t):
        return A0 + delta * t, delta

    return path


def bent_path(conn0, conn1, bend):
    """Linear path displaced by ``t (1-t) bend``; same endpoints."""
    A0 = conn0.coefficient
    delta = conn1.coefficient - A0

    def path(t):
        return A0 + delta * t + bend * (t * (1.0 - t)), delta + bend * (1.0 - 2.0 * t)

    return path


def _check_conn_pair(conn0, conn1):
    if conn0.manifold != conn1.manifold:
        raise ValueError("connections live on different manifolds")
    if conn0.rank != conn1.rank:
        raise ValueError(f"rank mismatch: {conn0.rank} vs {conn1.rank}")


def cs_transgression(conn0, conn1, steps=32, path=None, branch=1):
    """Chern-Simons form along a path of connections.

    ``-(2 pi i)^{-1/2} phi int_0^1 Tr[A'_t exp(-F_t)] dt`` with ``steps``
    Gauss-Legendre nodes in ``t``.  The default path is linear.
    """
    _check_conn_pair(conn0, conn1)
    steps = check_positive_int(steps, "steps", minimum=2)
    if path is None:
        path = linear_path(conn0, conn1)
    nodes, weights = np.polynomial.legendre.leggauss(steps)
    nodes = 0.5 * (nodes + 1.0)
    weights = 0.5 * weights
    m = conn0.manifold
    total = Form.zero(m)
    for t, wt in zip(nodes, weights):
        A_t, A_dot = path(float(t))
        F_t = exterior_d(A_t) + wedge(A_t, A_t)
        integrand = wedge(A_dot, form_exp(-F_t)).trace()
        total = total + integrand * wt
    return phi(total, branch) * (-1.0 / _root(branch))


def _check_omega(omega):
    if any(d != 1 for d in omega.degrees):
        raise ValueError("omega must be a matrix 1-form")


def _odd_terms(omega, branch):
    jmax = (omega.manifold.dim - 1) // 2
    return [(j, odd_chern_form(omega, j, branch)) for j in range(jmax + 1)]


def cs_series(omega, r, branch=1):
    """Closed form ``-(r / 2 pi) sum_j a_j(r) / j! c_{2j+1}``."""
    _check_omega(omega)
    r = check_complex_scalar(r, "r")
    total = Form.zero(omega.manifold)
    for j, c in _odd_terms(omega, branch):
        total = total + c * (a_coeff(j, r) / math.factorial(j))
    return total * (-r / TWO_PI)


@dataclass(frozen=True)
class DefectPrediction:
    """Geometric side of the eta variation formula at parameter ``r``.

    ``breakdown[j]`` is the contribution of ``c_{2j+1}``.
    """

    r: complex
    value: complex
    breakdown: tuple


def _integrated_terms(ahat, chE, omega, branch):
    if not (ahat.manifold == chE.manifold == omega.manifold):
        raise ValueError("forms live on different manifolds")
    weight = wedge(ahat, chE)
    return [(j, integrate_top(wedge(weight, c))) for j, c in _odd_terms(omega, branch)]


def defect_rhs(ahat, chE, omega, r, branch=1):
    """``-(r / 2 pi) int A-hat ch(E) sum_j a_j(r)/j! c_{2j+1}`` with per-j parts."""
    _check_omega(omega)
    r = check_complex_scalar(r, "r")
    parts = tuple(
        -r / TWO_PI * a_coeff(j, r) / math.factorial(j) * integral
        for j, integral in _integrated_terms(ahat, chE, omega, branch)
    )
    value = 0j
    for p in parts:
        value += p
    return DefectPrediction(r, value, parts)


def imaginary_eta_prediction(ahat, chE, omega, branch=1):
    """``-(1/2 pi) int A-hat ch(E) sum_j 2^{2j} j! / (2j+1)! c_{2j+1}``.

    This is the predicted imaginary part of the reduced eta invariant of the
    original flat (non-unitary) twisting.
    """
    _check_omega(omega)
    total = 0j
    for j, integral in _integrated_terms(ahat, chE, omega, branch):
        coeff = float(Fraction(4**j * math.factorial(j), math.factorial(2 * j + 1)))
        total += coeff * integral
    return -total / TWO_PI
