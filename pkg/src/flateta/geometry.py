"""Flat model tori, matrix-valued differential forms and Chern-Weil helpers.

A :class:`Form` stores, for every strictly increasing multi-index ``I`` of
axes, a grid-sampled matrix field ``a_I`` so that ``a = sum_I a_I dtheta_I``.
Arrays have shape ``grid_shape + (rank, rank)``.  Differentiation is
spectral along each periodic axis and integration is the trapezoid rule,
which is exact for trigonometric polynomials below the Nyquist limit.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import expm

from ._validation import check_positive_int

TWO_PI = 2.0 * math.pi

__all__ = [
    "GridManifold",
    "Form",
    "PairingVector",
    "make_torus_grid",
    "wedge",
    "exterior_d",
    "integrate_top",
    "pair_cycles",
    "form_exp",
    "phi",
    "a_hat_form",
    "basis_form",
]


@dataclass(frozen=True)
class GridManifold:
    """Uniform periodic grid on the flat torus ``(R / 2 pi Z)^dim``.

    Use :func:`make_torus_grid` for the odd-dimensional model manifolds.
    The bare constructor also accepts auxiliary even-dimensional grids,
    which the characteristic-class algebra tests need to see degree-4
    terms that the model tori truncate away.
    """

    dim: int
    resolution: int
    period: float = TWO_PI

    def __post_init__(self):
        check_positive_int(self.dim, "dim")
        check_positive_int(self.resolution, "resolution", minimum=4)
        if self.resolution % 2:
            raise ValueError(f"resolution must be even, got {self.resolution}")
        if self.period != TWO_PI:
            raise ValueError("period is fixed at 2*pi")

    @property
    def shape(self):
        return (self.resolution,) * self.dim

    @property
    def spacing(self):
        return self.period / self.resolution

    @property
    def volume(self):
        return self.period**self.dim

    def axis_points(self):
        return np.arange(self.resolution) * self.spacing

    def coords(self):
        """Coordinate arrays ``theta_1 .. theta_dim`` on the full grid."""
        pts = self.axis_points()
        return np.meshgrid(*([pts] * self.dim), indexing="ij")

    def wavenumbers(self):
        k = np.fft.fftfreq(self.resolution, d=1.0 / self.resolution)
        # Nyquist mode has no well-defined derivative on an even grid.
        k[self.resolution // 2] = 0.0
        return k


def make_torus_grid(dim, resolution):
    """Odd-dimensional model torus: the circle (``dim=1``) or ``T^3``."""
    check_positive_int(dim, "dim")
    if dim % 2 == 0:
        raise ValueError(f"even-dimensional manifold (dim={dim}) is not supported")
    if dim not in (1, 3):
        raise ValueError(f"unsupported dimension {dim}; expected 1 or 3")
    return GridManifold(dim, resolution)


def _perm_sign(seq):
    inversions = sum(1 for i, j in itertools.combinations(range(len(seq)), 2) if seq[i] > seq[j])
    return -1 if inversions % 2 else 1


@dataclass(frozen=True, eq=False)
class Form:
    """Matrix-valued differential form sampled on a :class:`GridManifold`.

    ``components`` maps increasing axis tuples to arrays of shape
    ``manifold.shape + (rank, rank)``.  Missing keys are zero.
    """

    manifold: GridManifold
    rank: int
    components: dict = field(default_factory=dict)

    def __post_init__(self):
        expected = self.manifold.shape + (self.rank, self.rank)
        clean = {}
        for key, arr in self.components.items():
            key = tuple(int(k) for k in key)
            if list(key) != sorted(set(key)) or any(k < 0 or k >= self.manifold.dim for k in key):
                raise ValueError(f"invalid multi-index {key} for dim {self.manifold.dim}")
            arr = np.asarray(arr, dtype=complex)
            if arr.shape == self.manifold.shape and self.rank == 1:
                arr = arr[..., None, None]
            if arr.shape != expected:
                raise ValueError(f"component {key} has shape {arr.shape}, expected {expected}")
            arr.setflags(write=False)
            clean[key] = arr
        object.__setattr__(self, "components", clean)

    # construction helpers

    @classmethod
    def zero(cls, manifold, rank=1):
        return cls(manifold, rank, {})

    @classmethod
    def constant(cls, manifold, value, key=()):
        """Form with a spatially constant coefficient on ``dtheta_key``."""
        mat = np.atleast_2d(np.asarray(value, dtype=complex))
        arr = np.broadcast_to(mat, manifold.shape + mat.shape).copy()
        return cls(manifold, mat.shape[0], {tuple(key): arr})

    @classmethod
    def from_function(cls, manifold, func, key=()):
        """Sample a scalar function of the coordinate arrays on ``dtheta_key``."""
        vals = np.asarray(func(*manifold.coords()), dtype=complex)
        vals = np.broadcast_to(vals, manifold.shape)
        return cls(manifold, 1, {tuple(key): vals[..., None, None]})

    # inspection

    @property
    def scalar(self):
        return self.rank == 1

    @property
    def degrees(self):
        return sorted({len(k) for k in self.components})

    def component(self, key):
        key = tuple(key)
        if key in self.components:
            return self.components[key]
        return np.zeros(self.manifold.shape + (self.rank, self.rank), dtype=complex)

    def degree_part(self, degree):
        return Form(
            self.manifold,
            self.rank,
            {k: v for k, v in self.components.items() if len(k) == degree},
        )

    def max_abs(self):
        return max((float(np.max(np.abs(v))) for v in self.components.values()), default=0.0)

    def scalar_field(self, key=()):
        """Grid array of a rank-1 component."""
        if not self.scalar:
            raise ValueError("scalar_field requires a rank-1 form")
        return self.component(key)[..., 0, 0]

    # algebra

    def _combine(self, other, op):
        if not isinstance(other, Form):
            return NotImplemented
        if other.manifold != self.manifold:
            raise ValueError("forms live on different manifolds")
        if other.rank != self.rank:
            raise ValueError(f"rank mismatch: {self.rank} vs {other.rank}")
        out = dict(self.components)
        for k, v in other.components.items():
            out[k] = op(out[k], v) if k in out else op(np.zeros_like(v), v)
        return Form(self.manifold, self.rank, out)

    def __add__(self, other):
        return self._combine(other, np.add)

    def __sub__(self, other):
        return self._combine(other, np.subtract)

    def __neg__(self):
        return Form(self.manifold, self.rank, {k: -v for k, v in self.components.items()})

    def __mul__(self, c):
        c = complex(c)
        return Form(self.manifold, self.rank, {k: c * v for k, v in self.components.items()})

    __rmul__ = __mul__

    def map(self, func):
        """Apply ``func`` to every coefficient array (fiber-wise operations)."""
        comps = {k: func(v) for k, v in self.components.items()}
        rank = self.rank
        if comps:
            rank = next(iter(comps.values())).shape[-1]
        return Form(self.manifold, rank, comps)

    def trace(self):
        return Form(
            self.manifold,
            1,
            {k: np.trace(v, axis1=-2, axis2=-1)[..., None, None] for k, v in self.components.items()},
        )

    def dagger(self):
        """Fiber-wise conjugate transpose of each coefficient."""
        return self.map(lambda v: np.swapaxes(v, -1, -2).conj())

    def left_matmul(self, field_):
        """Multiply every coefficient on the left by a matrix field."""
        return self.map(lambda v: field_ @ v)

    def right_matmul(self, field_):
        return self.map(lambda v: v @ field_)


@dataclass(frozen=True)
class PairingVector:
    """Periods against the harmonic cycle basis; length ``b_1 + b_3``."""

    values: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.values, dtype=complex)
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)

    def __len__(self):
        return len(self.values)

    def __sub__(self, other):
        return PairingVector(self.values - other.values)

    def max_abs(self):
        return float(np.max(np.abs(self.values), initial=0.0))


def basis_form(manifold, *axes):
    """Scalar form ``dtheta_{a1} ^ ... ^ dtheta_{ak}`` (axes are 0-based)."""
    if len(set(axes)) != len(axes):
        return Form.zero(manifold)
    sign = _perm_sign(axes)
    key = tuple(sorted(axes))
    return Form.constant(manifold, sign, key=key)


def wedge(a, b):
    """Graded wedge product with matrix multiplication in the fiber."""
    if a.manifold != b.manifold:
        raise ValueError("forms live on different manifolds")
    if a.rank != b.rank and not (a.scalar or b.scalar):
        raise ValueError(f"rank mismatch: {a.rank} vs {b.rank}")
    rank = max(a.rank, b.rank)
    out = {}
    for (ka, va), (kb, vb) in itertools.product(a.components.items(), b.components.items()):
        if set(ka) & set(kb):
            continue
        merged = ka + kb
        sign = _perm_sign(merged)
        key = tuple(sorted(merged))
        if a.scalar or b.scalar:
            prod = va * vb
        else:
            prod = va @ vb
        prod = prod if sign > 0 else -prod
        if key in out:
            out[key] = out[key] + prod
        else:
            out[key] = prod
    if a.scalar and b.scalar:
        rank = 1
    return Form(a.manifold, rank, out)


def wedge_power(a, k):
    result = None
    for _ in range(k):
        result = a if result is None else wedge(result, a)
    return result


def _spectral_derivative(arr, axis, manifold):
    k = manifold.wavenumbers()
    shape = [1] * arr.ndim
    shape[axis] = -1
    spec = np.fft.fft(arr, axis=axis)
    return np.fft.ifft(1j * k.reshape(shape) * spec, axis=axis)


def exterior_d(a):
    """Exterior derivative by Fourier differentiation; raises degree by one."""
    out = {}
    for key, arr in a.components.items():
        for axis in range(a.manifold.dim):
            if axis in key:
                continue
            deriv = _spectral_derivative(arr, axis, a.manifold)
            # dtheta_axis ^ dtheta_key reordered into increasing order
            sign = -1 if sum(1 for i in key if i < axis) % 2 else 1
            new_key = tuple(sorted(key + (axis,)))
            term = deriv if sign > 0 else -deriv
            out[new_key] = out[new_key] + term if new_key in out else term
    return Form(a.manifold, a.rank, out)


def integrate_top(a):
    """Trace in the fiber, then trapezoid-rule integral of the top component."""
    top = tuple(range(a.manifold.dim))
    if top not in a.components:
        return 0j
    tr = np.trace(a.components[top], axis1=-2, axis2=-1)
    return complex(np.mean(tr) * a.manifold.volume)


def pair_cycles(a):
    """Periods of an odd form on the torus.

    For the circle this is the single circle period.  For ``T^3`` the three
    degree-1 slots integrate the 1-form part wedged with the dual 2-forms
    ``dtheta_2^dtheta_3``, ``dtheta_3^dtheta_1``, ``dtheta_1^dtheta_2``
    (so ``dtheta_1`` pairs to ``(2 pi)^3``), followed by the top-degree
    integral.
    """
    m = a.manifold
    if m.dim == 1:
        return PairingVector([integrate_top(a.degree_part(1))])
    if m.dim != 3:
        raise ValueError("pair_cycles supports the circle and T^3 only")
    one = a.degree_part(1)
    duals = [(1, 2), (2, 0), (0, 1)]
    vals = []
    for i, j in duals:
        vals.append(integrate_top(wedge(one, basis_form(m, i, j))))
    vals.append(integrate_top(a.degree_part(3)))
    return PairingVector(vals)


def form_exp(a):
    """Exponential of an even form.

    Positive-degree parts are nilpotent, so the series terminates by degree.
    A degree-0 matrix part ``X`` is exponentiated with scipy's
    scaling-and-squaring ``expm``; on the model tori ``N ^ N = 0`` for the
    degree-2 part ``N``, so ``exp(X + N) = e^X + int_0^1 e^{(1-s)X} N e^{sX} ds``
    exactly, and the integral is read off a block-triangular exponential.
    """
    if any(d % 2 for d in a.degrees):
        raise ValueError("form_exp requires even-degree components only")
    m = a.manifold
    eye = np.broadcast_to(np.eye(a.rank, dtype=complex), m.shape + (a.rank, a.rank)).copy()
    if () not in a.components:
        result = Form(m, a.rank, {(): eye})
        term = Form(m, a.rank, {(): eye})
        for k in range(1, m.dim // 2 + 1):
            term = wedge(term, a) * (1.0 / k)
            result = result + term
        return result
    if m.dim > 3:
        raise ValueError("form_exp with a degree-0 part is only supported on dim <= 3")
    x = a.components[()]
    out = {(): expm(x)}
    n = a.rank
    for key, arr in a.components.items():
        if not key:
            continue
        block = np.zeros(m.shape + (2 * n, 2 * n), dtype=complex)
        block[..., :n, :n] = x
        block[..., n:, n:] = x
        block[..., :n, n:] = arr
        out[key] = expm(block)[..., :n, n:]
    return Form(m, n, out)


def phi(a, branch=1):
    """Rescale degree-``i`` parts by ``(2 pi sqrt(-1))^{-i/2}``.

    ``branch`` selects the square root of ``2 pi i``: ``+1`` is the principal
    root, ``-1`` its negative.
    """
    root = branch * np.sqrt(TWO_PI * 1j)
    return Form(
        a.manifold,
        a.rank,
        {k: v * root ** (-len(k)) for k, v in a.components.items()},
    )


def a_hat_form(curvature, tol=1e-12):
    """Hirzebruch A-hat form from the Riemannian curvature 2-form matrix.

    ``A = 1 - p1/24 + (7 p1^2 - 4 p2)/5760`` with
    ``p1 = phi(Tr R^2)/2`` and ``p2 = phi((Tr R^2)^2 - 2 Tr R^4)/8``.
    Terms above the manifold dimension vanish by truncation.
    """
    R = curvature
    if any(d != 2 for d in R.degrees):
        raise ValueError("curvature must be a pure 2-form")
    for key, arr in R.components.items():
        if np.max(np.abs(arr + np.swapaxes(arr, -1, -2)), initial=0.0) > tol:
            raise ValueError(f"curvature component {key} is not antisymmetric in frame indices")
    m = R.manifold
    one = Form.constant(m, 1.0)
    if not R.components:
        return one
    r2 = wedge(R, R)
    tr2 = r2.trace()
    tr4 = wedge(r2, r2).trace()
    p1 = phi(tr2) * 0.5
    p2 = phi(wedge(tr2, tr2) - 2.0 * tr4) * 0.125
    return one - p1 * (1.0 / 24.0) + (7.0 * wedge(p1, p1) - 4.0 * p2) * (1.0 / 5760.0)
