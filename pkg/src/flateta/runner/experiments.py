"""Named end-to-end experiments.

Every experiment returns a :class:`~flateta.runner.report.Report`; module
errors are caught per check and recorded as failures so that one bad
sample never hides the others.
"""

from __future__ import annotations

import functools
import time
from dataclasses import replace
from concurrent.futures import ThreadPoolExecutor

import numpy as np
from scipy.integrate import quad

from ..chern import (
    a_coeff,
    a_coeff_exact,
    bent_path,
    central_binomial_ratio,
    chern_character,
    cs_series,
    cs_transgression,
    defect_rhs,
    imaginary_eta_prediction,
)
from ..continuation import holo_fit
from ..geometry import Form, exterior_d, pair_cycles
from ..spectral import (
    ModC,
    adjoint_bundle,
    bundle_spectrum,
    eta_defect,
    reduced_eta_modZ,
    rho_invariant,
)
from .config import format_complex
from .report import Check, Report

__all__ = ["run_experiment", "A_COEFF_SAMPLE_R", "path_bend"]

A_COEFF_SAMPLE_R = (0.0, 0.5, -0.5, 1.0, -1.0, 2j, -2j, 1j)
QUADRATURE_NODES = 10_000


def _tag(r):
    return f"r={format_complex(r)}"


def _guarded(name, tol, func):
    try:
        return func()
    except Exception as exc:  # recorded as a failing check, never a crash
        return [Check.failure(f"{name}:error", exc, tol)]


def _map(jobs, func, items):
    items = list(items)
    if jobs <= 1 or len(items) <= 1:
        return [func(x) for x in items]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(func, items))


def path_bend(manifold, rank):
    """Deterministic periodic matrix 1-form used to bend the CS path."""
    coords = manifold.coords()
    comps = {}
    for k in range(manifold.dim):
        mat = (0.1 + 0.2j) * (k + 1) * np.ones((rank, rank)) + 0.05 * np.eye(rank)
        wave = 0.2 * np.cos(coords[(k + 1) % manifold.dim]) + 0.1
        comps[(k,)] = wave[..., None, None] * mat
    return Form(manifold, rank, comps)


def _flat_weights(bundle, e_rank):
    m = bundle.manifold
    return Form.constant(m, 1.0), Form.constant(m, float(e_rank))


# verify-cs


def _verify_cs(spec, jobs):
    bundle = spec.build_bundle()
    ce = bundle.unitarized()
    bend = path_bend(bundle.manifold, bundle.rank)

    def one(r):
        out = []
        cr = bundle.deformed(r)
        cs = cs_transgression(ce, cr, steps=spec.quadrature)
        lhs = exterior_d(cs)
        rhs = chern_character(cr) - chern_character(ce)
        out.append(Check.compare(
            f"dcs[{_tag(r)}]", lhs.max_abs(), rhs.max_abs(), (lhs - rhs).max_abs(), spec.tol("dcs"),
            "max|dCS - (ch1 - ch0)| over all components",
        ))
        bent = cs_transgression(ce, cr, steps=spec.quadrature, path=bent_path(ce, cr, bend))
        p_lin, p_bent = pair_cycles(cs), pair_cycles(bent)
        out.append(Check.compare(
            f"cs-path-independence[{_tag(r)}]", p_lin.values, p_bent.values,
            (p_lin - p_bent).max_abs(), spec.tol("periods"),
        ))
        return out

    results = _map(jobs, lambda r: _guarded(f"verify-cs[{_tag(r)}]", spec.tol("dcs"), lambda: one(r)), spec.r_grid)
    return [c for group in results for c in group]


# verify-prop21: transgression periods against the closed-form series


def _verify_series(spec, jobs):
    bundle = spec.build_bundle()
    ce = bundle.unitarized()
    omega = bundle.omega()

    def one(r):
        cs = cs_transgression(ce, bundle.deformed(r), steps=spec.quadrature)
        p_cs = pair_cycles(cs)
        p_series = pair_cycles(cs_series(omega, r))
        out = [Check.compare(
            f"cs-series-periods[{_tag(r)}]", p_cs.values, p_series.values,
            (p_cs - p_series).max_abs(), spec.tol("periods"),
            f"{len(p_cs)} periods: transgression vs closed-form series",
        )]
        if r.imag == 0:
            out.append(Check.compare(
                f"cs-period-reality[{_tag(r)}]", np.abs(p_cs.values.imag), 0.0,
                float(np.max(np.abs(p_cs.values.imag))), spec.tol("reality"),
            ))
        return out

    results = _map(jobs, lambda r: _guarded(f"verify-prop21[{_tag(r)}]", spec.tol("periods"), lambda: one(r)), spec.r_grid)
    return [c for group in results for c in group]


# eta-defect


def _eta_defect(spec, jobs, report):
    bundle = spec.build_bundle()
    ahat, chE = _flat_weights(bundle, spec.e_rank)
    omega = bundle.omega()

    def one(r):
        if r.imag != 0:
            raise ValueError("eta-defect compares real r only; use theorem-2-2 for complex r")
        spectral = eta_defect(bundle, spec.e_rank, r, spec.spin)
        geometric = defect_rhs(ahat, chE, omega, r)
        other_spin = "antiperiodic" if spec.spin == "periodic" else "periodic"
        flipped = eta_defect(bundle, spec.e_rank, r, other_spin)
        return [
            Check.compare(
                f"eta-defect[{_tag(r)}]", spectral.value, geometric.value,
                spectral.distance(ModC(geometric.value)), spec.tol("default"),
                "spectral vs geometric defect in C/Z",
            ),
            Check.compare(
                f"eta-defect-spin-independence[{_tag(r)}]", spectral.value, flipped.value,
                spectral.distance(flipped), spec.tol("spin"),
            ),
            Check.compare(
                f"eta-defect-self-adjoint-reality[{_tag(r)}]", spectral.imag, 0.0,
                abs(spectral.imag), spec.tol("eta_reality"),
            ),
        ]

    results = _map(jobs, lambda r: _guarded(f"eta-defect[{_tag(r)}]", spec.tol("default"), lambda: one(r)), spec.r_grid)
    for r, group in zip(spec.r_grid, results):
        if all(c.passed or not c.name.endswith(":error") for c in group):
            report.spectra.append(bundle_spectrum(bundle, spec.e_rank, r, spec.spin, gauge_reduce=True))
    return [c for group in results for c in group]


# theorem-2-2: continuation to r = sqrt(-1)


def _endpoint(spec, jobs, report):
    bundle = spec.build_bundle()
    ahat, chE = _flat_weights(bundle, spec.e_rank)
    omega = bundle.omega()
    checks = []
    real_r = [r.real for r in spec.r_grid if r.imag == 0]

    samples = _map(jobs, lambda r: (r, eta_defect(bundle, spec.e_rank, r, spec.spin)), real_r)
    fit = holo_fit(samples, degree_bound=bundle.manifold.dim, residual_tol=spec.tol("fit_residual"))
    checks.append(Check.compare(
        "holo-fit-residual", fit.residual, 0.0, fit.residual, spec.tol("fit_residual"),
        f"odd polynomial coefficients {[format_complex(c) for c in fit.coefficients]}",
    ))

    continued = fit.evaluate(1j)
    direct = eta_defect(bundle, spec.e_rank, 1j, spec.spin)
    checks.append(Check.compare(
        "endpoint-continued-vs-spectral[r=0+1i]", continued, direct.value,
        direct.distance(ModC(continued)), spec.tol("default"),
        "fitted polynomial at r = sqrt(-1) vs directly continued spectral defect",
    ))
    geometric = defect_rhs(ahat, chE, omega, 1j)
    checks.append(Check.compare(
        "endpoint-spectral-vs-geometric[r=0+1i]", direct.value, geometric.value,
        direct.distance(ModC(geometric.value)), spec.tol("default"),
    ))
    rhs_at_one = defect_rhs(ahat, chE, omega, 1.0)
    checks.append(Check.compare(
        "fit-vs-chern-breakdown", fit.coefficients[0], rhs_at_one.breakdown[0],
        abs(fit.coefficients[0] - rhs_at_one.breakdown[0]), spec.tol("default"),
        "linear coefficient vs the c_1 contribution at r = 1",
    ))

    spec_full = bundle_spectrum(bundle, spec.e_rank, 1j, spec.spin, gauge_reduce=True)
    spec_e = bundle_spectrum(bundle, spec.e_rank, 0.0, spec.spin, gauge_reduce=True)
    report.spectra.extend([spec_e, spec_full])
    eta_full = reduced_eta_modZ(spec_full)
    eta_e = reduced_eta_modZ(spec_e)
    checks.append(Check.compare(
        "decomposition-real", eta_full.real, eta_e.value,
        ModC(eta_full.real).distance(eta_e), spec.tol("decomposition"),
        "Re eta_bar(D) vs eta_bar(D^e) mod Z",
    ))
    imag_pred = imaginary_eta_prediction(ahat, chE, omega)
    checks.append(Check.compare(
        "decomposition-imag", eta_full.imag, imag_pred,
        abs(eta_full.imag - imag_pred), spec.tol("decomposition"),
        "Im eta_bar(D) vs Chern-form integral",
    ))
    return checks


# rho


def _diagonal_parts(spec):
    """Rank-1 sub-specs when connection and metric are diagonal, else None."""
    mats = list(spec.connection)
    metric = spec.metric if spec.metric is not None else np.eye(spec.rank)
    allm = mats + [metric] + list(spec.metric_harmonics.values())
    if spec.rank == 1 or any(np.max(np.abs(m - np.diag(np.diag(m)))) > 0 for m in allm):
        return None
    parts = []
    for i in range(spec.rank):
        parts.append(replace(
            spec,
            rank=1,
            connection=tuple(np.array([[m[i, i]]]) for m in mats),
            metric=np.array([[metric[i, i]]]),
            metric_harmonics={k: np.array([[v[i, i]]]) for k, v in spec.metric_harmonics.items()},
        ))
    return parts


def _rho(spec, jobs, report):
    bundle = spec.build_bundle()
    tol = spec.tol("decomposition")
    res = rho_invariant(bundle, spec.e_rank, spec.spin)
    checks = [
        Check.compare(
            "rho-real", res.value.real, res.real_prediction.value, res.real_residual(), tol,
            "Re rho vs eta_bar(D^e) - rk(F) eta_bar(D^E) mod Z",
        ),
        Check.compare(
            "rho-imag", res.value.imag, res.imag_prediction, res.imag_residual(), tol,
            "Im rho vs Chern-form integral",
        ),
        Check.compare(
            "rho-imag-prediction-real", res.imag_prediction_residual, 0.0, res.imag_prediction_residual,
            spec.tol("reality"),
        ),
    ]
    adj = rho_invariant(adjoint_bundle(bundle), spec.e_rank, spec.spin)
    checks.append(Check.compare(
        "rho-conjugation-imag", adj.value.imag, -res.value.imag, abs(adj.value.imag + res.value.imag), tol,
        "adjoint bundle negates Im rho",
    ))
    checks.append(Check.compare(
        "rho-conjugation-real", adj.value.real, res.value.real,
        ModC(adj.value.real).distance(ModC(res.value.real)), tol,
    ))
    parts = _diagonal_parts(spec)
    if parts is not None:
        total = ModC(0)
        for part in parts:
            total = total + rho_invariant(part.build_bundle(), spec.e_rank, spec.spin).value
        checks.append(Check.compare(
            "rho-additivity", res.value.value, total.value, res.value.distance(total), tol,
            f"rank-{spec.rank} rho vs sum of {len(parts)} rank-1 summands",
        ))
    report.spectra.append(bundle_spectrum(bundle, spec.e_rank, 1j, spec.spin, gauge_reduce=True))
    return checks


# identities


@functools.lru_cache(maxsize=4)
def _composite_legendre(n, per_panel=10):
    """``n`` nodes on [0, 1]: ``n / per_panel`` panels of Gauss-Legendre."""
    panels = n // per_panel
    x, w = np.polynomial.legendre.leggauss(per_panel)
    left = np.arange(panels)[:, None] / panels
    half = 0.5 / panels
    nodes = (left + half * (x + 1.0)).ravel()
    weights = np.broadcast_to(half * w, (panels, per_panel)).ravel()
    return nodes, weights


def gauss_quadrature_a(j, r, n=QUADRATURE_NODES):
    u, w = _composite_legendre(n)
    return complex(np.sum(w * (1.0 + u * u * complex(r) ** 2) ** j))


def adaptive_quadrature_a(j, r):
    r2 = complex(r) ** 2
    re = quad(lambda u: ((1.0 + u * u * r2) ** j).real, 0.0, 1.0, epsabs=0.0, epsrel=1e-13, limit=200)[0]
    im = quad(lambda u: ((1.0 + u * u * r2) ** j).imag, 0.0, 1.0, epsabs=0.0, epsrel=1e-13, limit=200)[0]
    return complex(re, im)


def identity_checks(jmax, tol_quadrature=1e-10, tol_a=1e-12):
    checks = []
    for j in range(jmax + 1):
        target = central_binomial_ratio(j)
        exact_re, exact_im = a_coeff_exact(j, 1j)
        ok = exact_re == target and exact_im == 0
        checks.append(Check(
            f"identity-exact[j={j:02d}]", (complex(float(exact_re), float(exact_im)),), (complex(float(target)),),
            0.0 if ok else 1.0, 0.0, ok, f"a_j(sqrt(-1)) = {exact_re} vs 2^2j (j!)^2/(2j+1)! = {target}",
        ))
        q = gauss_quadrature_a(j, 1j)
        checks.append(Check.compare(
            f"identity-quadrature[j={j:02d}]", q, float(target), abs(q - float(target)), tol_quadrature,
            f"{QUADRATURE_NODES}-node composite Gauss-Legendre of int_0^1 (1-u^2)^j du",
        ))
        for r in A_COEFF_SAMPLE_R:
            closed = a_coeff(j, r)
            oracle = adaptive_quadrature_a(j, r)
            scale = max(1.0, abs(oracle))
            checks.append(Check.compare(
                f"a-coeff-vs-quadrature[j={j:02d},{_tag(r)}]", closed, oracle, abs(closed - oracle) / scale, tol_a,
                "relative difference, binomial closed form vs adaptive quadrature",
            ))
    return checks


def _identities(spec, jobs):
    return identity_checks(spec.jmax, spec.tol("quadrature"), spec.tol("a_coeff"))


def run_experiment(spec, jobs=1):
    """Execute the experiment named in ``spec`` and assemble its report."""
    start = time.perf_counter()
    report = Report(spec.experiment, spec.to_dict())
    name = spec.experiment
    try:
        if name == "verify-cs":
            checks = _verify_cs(spec, jobs)
        elif name == "verify-prop21":
            checks = _verify_series(spec, jobs)
        elif name == "eta-defect":
            checks = _eta_defect(spec, jobs, report)
        elif name == "theorem-2-2":
            checks = _endpoint(spec, jobs, report)
        elif name == "rho":
            checks = _rho(spec, jobs, report)
        elif name == "identities":
            checks = _identities(spec, jobs)
        else:
            raise ValueError(f"unknown experiment {name!r}")
    except Exception as exc:
        checks = [Check.failure(f"{name}:error", exc)]
    report.checks = sorted(checks, key=lambda c: c.name)
    report.timings = {"total_seconds": time.perf_counter() - start}
    return report
