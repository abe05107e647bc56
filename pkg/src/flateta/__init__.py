"""C/Z-valued reduced eta invariants of non-unitary flat bundles.

The package builds the one-parameter family of connections interpolating a
flat connection and its metric unitarization, evaluates the Chern-Simons
side on periodic grid manifolds (circle and 3-torus), evaluates the spectral
side on circle Dirac operators by Hurwitz zeta continuation, and checks that
the two agree, including after continuing the deformation parameter to
``r = sqrt(-1)``.
"""

from .bundle import (
    BundleMetric,
    Connection,
    FlatBundle,
    adjoint_connection,
    curvature,
    deform,
    flat_connection,
    holonomy,
    omega_form,
    unitarize,
)
from .chern import (
    a_coeff,
    a_coeff_exact,
    chern_character,
    cs_series,
    cs_transgression,
    defect_rhs,
    imaginary_eta_prediction,
    odd_chern_form,
)
from .continuation import HoloFit, OddPolynomialContinuation, holo_fit, lift_defects
from .geometry import (
    Form,
    GridManifold,
    a_hat_form,
    exterior_d,
    form_exp,
    integrate_top,
    make_torus_grid,
    pair_cycles,
    phi,
    wedge,
)
from .spectral import ModC, bundle_spectrum, circle_spectrum, eta_defect, hurwitz_zeta, reduced_eta_modZ, rho_invariant

__version__ = "0.1.0"

__all__ = [
    "BundleMetric",
    "Connection",
    "FlatBundle",
    "Form",
    "GridManifold",
    "HoloFit",
    "ModC",
    "OddPolynomialContinuation",
    "a_coeff",
    "a_coeff_exact",
    "a_hat_form",
    "adjoint_connection",
    "bundle_spectrum",
    "chern_character",
    "circle_spectrum",
    "cs_series",
    "cs_transgression",
    "curvature",
    "defect_rhs",
    "deform",
    "eta_defect",
    "exterior_d",
    "flat_connection",
    "form_exp",
    "holo_fit",
    "holonomy",
    "hurwitz_zeta",
    "imaginary_eta_prediction",
    "integrate_top",
    "lift_defects",
    "make_torus_grid",
    "odd_chern_form",
    "omega_form",
    "pair_cycles",
    "phi",
    "reduced_eta_modZ",
    "rho_invariant",
    "unitarize",
    "wedge",
]
