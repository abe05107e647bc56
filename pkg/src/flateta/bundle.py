"""Connections and Hermitian metrics on globally trivialized bundles.

A connection is ``d + A`` for a matrix-valued 1-form ``A`` acting on column
vectors, and a metric is a positive Hermitian matrix field ``g`` with
``g(u, v) = u^dagger g v``.  With the adjoint defined by
``d g(u, v) = g(nabla u, v) + g(u, nabla^* v)`` one finds

    A^* = g^{-1} dg - g^{-1} A^dagger g,
    omega = A^* - A,

and the unitarization ``A + omega/2`` preserves ``g`` while the deformation
``A + omega/2 + (i r / 2) omega`` returns ``A`` at ``r = sqrt(-1)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp
from scipy.linalg import expm

from ._validation import check_complex_scalar, check_square_matrix, is_hermitian
from .geometry import Form, TWO_PI, exterior_d, wedge

__all__ = [
    "BundleMetric",
    "Connection",
    "FlatBundle",
    "flat_connection",
    "omega_form",
    "adjoint_connection",
    "unitarize",
    "deform",
    "curvature",
    "holonomy",
    "metric_compatibility_defect",
]

FLATNESS_TOL = 1e-10


class BundleMetric:
    """Positive-definite Hermitian matrix field on a grid manifold.

    Parameters
    ----------
    manifold : GridManifold
    values : array, shape ``manifold.shape + (m, m)``
    floor : float
        Smallest admissible eigenvalue; degenerate metrics are rejected.
    """

    def __init__(self, manifold, values, floor=1e-8):
        values = np.asarray(values, dtype=complex)
        if values.shape[: manifold.dim] != manifold.shape or values.ndim != manifold.dim + 2:
            raise ValueError(f"metric values have shape {values.shape}, expected {manifold.shape} + (m, m)")
        if values.shape[-1] != values.shape[-2]:
            raise ValueError("metric fiber matrices must be square")
        if not is_hermitian(values, 1e-12):
            raise ValueError("metric is not Hermitian to 1e-12")
        values = 0.5 * (values + np.swapaxes(values, -1, -2).conj())
        lowest = float(np.min(np.linalg.eigvalsh(values)))
        if lowest < floor:
            raise ValueError(f"metric smallest eigenvalue {lowest:.3e} is below the floor {floor:.1e}")
        values.setflags(write=False)
        self.manifold = manifold
        self.values = values
        self.floor = floor

    @classmethod
    def constant(cls, manifold, matrix, floor=1e-8):
        mat = check_square_matrix(matrix, "metric")
        return cls(manifold, np.broadcast_to(mat, manifold.shape + mat.shape).copy(), floor)

    @classmethod
    def identity(cls, manifold, rank):
        return cls.constant(manifold, np.eye(rank))

    @classmethod
    def harmonic(cls, manifold, base, harmonics=None, floor=1e-8):
        """``g = base + sum cos(theta_k) C + sin(theta_k) S`` over given harmonics.

        ``harmonics`` maps ``(axis, "cos" | "sin")`` to a Hermitian matrix.
        """
        base = check_square_matrix(base, "metric")
        values = np.broadcast_to(base, manifold.shape + base.shape).astype(complex)
        coords = manifold.coords()
        for (axis, kind), mat in (harmonics or {}).items():
            mat = check_square_matrix(mat, f"metric harmonic {kind}{axis + 1}", rank=base.shape[0])
            if not 0 <= axis < manifold.dim:
                raise ValueError(f"harmonic axis {axis} out of range")
            wave = {"cos": np.cos, "sin": np.sin}[kind](coords[axis])
            values = values + wave[..., None, None] * mat
        return cls(manifold, values, floor)

    @property
    def rank(self):
        return self.values.shape[-1]

    def is_constant(self, tol=1e-14):
        ref = self.values.reshape((-1,) + self.values.shape[-2:])
        return bool(np.max(np.abs(ref - ref[0])) <= tol)

    def inverse(self):
        return np.linalg.inv(self.values)

    def differential(self):
        return exterior_d(Form(self.manifold, self.rank, {(): self.values}))


class Connection:
    """The connection ``d + A`` on a trivialized bundle.

    ``coefficient`` is a matrix 1-form.  With ``flat=True`` the curvature is
    checked at construction against ``FLATNESS_TOL``, unless ``verify=False``.
    Connections derived from a flat one (adjoint, deformations) pass
    ``verify=False``: they are flat exactly, and their grid curvature only
    measures aliasing of ``g^{-1}``, which is resolution dependent.
    """

    def __init__(self, coefficient, flat=False, verify=True):
        if any(d != 1 for d in coefficient.degrees):
            raise ValueError("connection coefficient must be a 1-form")
        self.coefficient = coefficient
        self.flat = bool(flat)
        if self.flat and verify:
            resid = curvature(self).max_abs()
            if resid > FLATNESS_TOL:
                raise ValueError(f"connection flagged flat has curvature {resid:.3e}")

    @property
    def manifold(self):
        return self.coefficient.manifold

    @property
    def rank(self):
        return self.coefficient.rank

    def constant_matrices(self, tol=1e-12):
        """The constant matrices ``W_k`` if the coefficient is constant, else None."""
        mats = []
        for axis in range(self.manifold.dim):
            arr = self.coefficient.component((axis,))
            flat_arr = arr.reshape((-1,) + arr.shape[-2:])
            if np.max(np.abs(flat_arr - flat_arr[0])) > tol:
                return None
            mats.append(np.array(flat_arr[0]))
        return mats


@dataclass(frozen=True)
class FlatBundle:
    """A flat connection together with a (not necessarily parallel) metric."""

    connection: Connection
    metric: BundleMetric

    def __post_init__(self):
        _check_pair(self.connection, self.metric)

    @property
    def manifold(self):
        return self.connection.manifold

    @property
    def rank(self):
        return self.connection.rank

    def omega(self):
        return omega_form(self.connection, self.metric)

    def unitarized(self):
        return unitarize(self.connection, self.metric)

    def deformed(self, r):
        return deform(self.unitarized(), self.omega(), r)


def flat_connection(manifold, matrices):
    """Canonical flat connection ``sum_k W_k dtheta_k`` with commuting ``W_k``."""
    if len(matrices) != manifold.dim:
        raise ValueError(f"need {manifold.dim} matrices, got {len(matrices)}")
    mats = [check_square_matrix(w, f"W{k + 1}") for k, w in enumerate(matrices)]
    rank = mats[0].shape[0]
    for k, w in enumerate(mats):
        if w.shape[0] != rank:
            raise ValueError(f"W{k + 1}: rank {w.shape[0]} differs from W1 rank {rank}")
    for i in range(len(mats)):
        for j in range(i + 1, len(mats)):
            comm = mats[i] @ mats[j] - mats[j] @ mats[i]
            if np.max(np.abs(comm)) > 1e-12:
                raise ValueError(f"W{i + 1} and W{j + 1} do not commute; connection would not be flat")
    comps = {(k,): np.broadcast_to(w, manifold.shape + w.shape).copy() for k, w in enumerate(mats)}
    return Connection(Form(manifold, rank, comps), flat=True)


def _check_pair(conn, g):
    if conn.manifold != g.manifold:
        raise ValueError("connection and metric live on different manifolds")
    if conn.rank != g.rank:
        raise ValueError(f"rank mismatch: connection {conn.rank}, metric {g.rank}")


def omega_form(conn, g):
    """Defect 1-form ``omega = g^{-1} dg - g^{-1} A^dagger g - A``."""
    _check_pair(conn, g)
    A = conn.coefficient
    ginv = g.inverse()
    return g.differential().left_matmul(ginv) - A.dagger().left_matmul(ginv).right_matmul(g.values) - A


def adjoint_connection(conn, g):
    """``nabla^* = nabla + omega``; flat whenever ``conn`` is."""
    return Connection(conn.coefficient + omega_form(conn, g), flat=conn.flat, verify=False)


def unitarize(conn, g):
    """``nabla^{e} = nabla + omega / 2``, the metric-compatible midpoint."""
    return Connection(conn.coefficient + omega_form(conn, g) * 0.5)


def deform(conn_e, omega, r):
    """``nabla^{e,(r)} = nabla^e + (sqrt(-1) r / 2) omega``."""
    r = check_complex_scalar(r, "r")
    if omega.manifold != conn_e.manifold or omega.rank != conn_e.rank:
        raise ValueError("omega does not match the connection's manifold/rank")
    if any(d != 1 for d in omega.degrees):
        raise ValueError("omega must be a 1-form")
    return Connection(conn_e.coefficient + omega * (0.5j * r))


def curvature(conn):
    """``dA + A ^ A``."""
    A = conn.coefficient
    return exterior_d(A) + wedge(A, A)


def metric_compatibility_defect(conn, g):
    """The 1-form ``dg - A^dagger g - g A``; vanishes iff ``conn`` preserves ``g``."""
    _check_pair(conn, g)
    A = conn.coefficient
    return g.differential() - A.dagger().right_matmul(g.values) - A.left_matmul(g.values)


def holonomy(conn, axis=0):
    """Parallel transport once around the ``axis``-th circle.

    Constant coefficients give ``exp(-2 pi W_k)``.  On the circle any
    coefficient is allowed (every connection there is flat) and the
    transport equation ``T' = -A(theta) T`` is integrated with the
    coefficient trigonometrically interpolated between grid points.
    """
    m = conn.manifold
    if not 0 <= axis < m.dim:
        raise ValueError(f"axis {axis} out of range for dim {m.dim}")
    mats = conn.constant_matrices()
    if mats is not None:
        if m.dim > 1 and not conn.flat:
            if curvature(conn).max_abs() > FLATNESS_TOL:
                raise ValueError("holonomy requires a flat connection")
        return expm(-TWO_PI * mats[axis])
    if m.dim != 1:
        raise ValueError("holonomy of non-constant connections is only supported on the circle")
    return _circle_transport(conn.coefficient.component((0,)), m)


def _circle_transport(samples, manifold):
    n = manifold.resolution
    rank = samples.shape[-1]
    coeffs = np.fft.fft(samples, axis=0) / n
    k = np.fft.fftfreq(n, d=1.0 / n)
    # split the Nyquist mode evenly so the interpolant is real for real data
    weights = np.ones(n)
    weights[n // 2] = 0.5
    k_pairs = np.concatenate([k, [n // 2]])
    coeffs = np.concatenate([coeffs * weights[:, None, None], coeffs[n // 2][None] * 0.5])

    def coefficient_at(theta):
        phases = np.exp(1j * k_pairs * theta)
        return np.tensordot(phases, coeffs, axes=(0, 0))

    def rhs(theta, y):
        T = y.reshape(rank, rank)
        return (-coefficient_at(theta) @ T).ravel()

    sol = solve_ivp(
        rhs,
        (0.0, TWO_PI),
        np.eye(rank, dtype=complex).ravel(),
        method="DOP853",
        rtol=1e-13,
        atol=1e-14,
    )
    if not sol.success:
        raise RuntimeError(f"parallel transport integration failed: {sol.message}")
    return sol.y[:, -1].reshape(rank, rank)
