"""Input validation helpers shared by the public API.

scikit-learn's ``check_array`` refuses complex input, and nearly everything
here is complex, so these are small purpose-built replacements.
"""

from __future__ import annotations

import numbers

import numpy as np


def check_square_matrix(value, name="matrix", rank=None):
    """Return ``value`` as a complex 2-D square array.

    Raises ``ValueError`` naming ``name`` on shape problems or non-finite
    entries.
    """
    arr = np.asarray(value, dtype=complex)
    if arr.ndim == 0:
        arr = arr.reshape(1, 1)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ValueError(f"{name}: expected a square matrix, got shape {arr.shape}")
    if rank is not None and arr.shape[0] != rank:
        raise ValueError(
            f"{name}: matrix is {arr.shape[0]}x{arr.shape[0]} but rank is {rank}"
        )
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name}: matrix has non-finite entries")
    return arr


def check_complex_scalar(value, name="value"):
    if isinstance(value, numbers.Number):
        z = complex(value)
    else:
        arr = np.asarray(value)
        if arr.size != 1:
            raise ValueError(f"{name}: expected a scalar, got shape {arr.shape}")
        z = complex(arr.reshape(()))
    if not (np.isfinite(z.real) and np.isfinite(z.imag)):
        raise ValueError(f"{name}: must be finite, got {z!r}")
    return z


def check_positive_int(value, name="value", minimum=1):
    if isinstance(value, bool) or not isinstance(value, numbers.Integral):
        raise TypeError(f"{name}: expected an integer, got {type(value).__name__}")
    if value < minimum:
        raise ValueError(f"{name}: must be >= {minimum}, got {value}")
    return int(value)


def check_complex_vector(values, name="values"):
    arr = np.atleast_1d(np.asarray(values, dtype=complex))
    if arr.ndim != 1:
        raise ValueError(f"{name}: expected a 1-D sequence, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name}: contains non-finite entries")
    return arr


def check_real_vector(values, name="values", tol=0.0):
    arr = check_complex_vector(values, name)
    if np.any(np.abs(arr.imag) > tol):
        raise ValueError(f"{name}: expected real values")
    return arr.real.copy()


def is_hermitian(arr, tol):
    """Pointwise Hermitian test over the trailing two axes."""
    return bool(np.max(np.abs(arr - np.swapaxes(arr, -1, -2).conj()), initial=0.0) <= tol)
