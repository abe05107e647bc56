"""Structural invariant suite plus every bundled example config."""

from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from importlib import resources

import numpy as np

from ..bundle import (
    BundleMetric,
    FlatBundle,
    adjoint_connection,
    curvature,
    flat_connection,
    metric_compatibility_defect,
)
from ..chern import odd_chern_form
from ..geometry import Form, a_hat_form, exterior_d, form_exp, integrate_top, make_torus_grid, pair_cycles, wedge
from ..spectral import hurwitz_zeta
from .config import parse_config
from .experiments import run_experiment
from .report import Check, Report

__all__ = ["structural_checks", "bundled_configs", "run_selftest", "random_trig_form", "t3_example_bundle"]


def random_trig_form(manifold, degree, rank, rng, max_mode=3):
    """Random band-limited matrix form with all components of ``degree``."""
    import itertools

    coords = manifold.coords()
    comps = {}
    for key in itertools.combinations(range(manifold.dim), degree):
        field = np.zeros(manifold.shape + (rank, rank), dtype=complex)
        for _ in range(3):
            kvec = rng.integers(-max_mode, max_mode + 1, size=manifold.dim)
            phase = sum(k * c for k, c in zip(kvec, coords))
            coef = rng.normal(size=(rank, rank)) + 1j * rng.normal(size=(rank, rank))
            field += np.exp(1j * phase)[..., None, None] * coef
        comps[key] = field
    return Form(manifold, rank, comps)


def t3_example_bundle(resolution=16):
    """Rank-2 flat bundle on T^3 with a varying metric (non-commuting omega)."""
    m = make_torus_grid(3, resolution)
    nil = np.array([[0, 1], [0, 0]], dtype=complex)
    eye = np.eye(2)
    ws = [0.2 * eye + 0.3 * nil, (0.1 + 0.2j) * eye - 0.25j * nil, -0.15 * eye + (0.1 + 0.1j) * nil]
    harmonics = {
        (0, "cos"): np.array([[0, 0.3], [0.3, 0]]),
        (1, "sin"): np.array([[0.2, 0.1j], [-0.1j, -0.1]]),
        (2, "cos"): np.array([[0.1, 0.05], [0.05, 0.2]]),
    }
    g = BundleMetric.harmonic(m, [[1.5, 0.2], [0.2, 1.2]], harmonics)
    return FlatBundle(flat_connection(m, ws), g)


def _check(name, value, tol, detail=""):
    return Check.compare(name, value, 0.0, value, tol, detail)


def structural_checks(seed=0):
    rng = np.random.default_rng(seed)
    checks = []
    for dim, res in ((1, 32), (3, 12)):
        m = make_torus_grid(dim, res)
        tag = f"T{dim}"
        for degree in range(dim):
            a = random_trig_form(m, degree, 2, rng)
            checks.append(_check(f"d-squared[{tag},deg={degree}]", exterior_d(exterior_d(a)).max_abs(), 1e-10))
        b = random_trig_form(m, dim - 1, 1, rng)
        checks.append(_check(f"stokes[{tag}]", abs(integrate_top(exterior_d(b))), 1e-10))
        f = random_trig_form(m, 0, 1, rng)
        checks.append(_check(f"exact-periods-vanish[{tag}]", pair_cycles(exterior_d(f)).max_abs(), 1e-10))
        x = random_trig_form(m, 0, 2, rng)
        vals, vecs = np.linalg.eig(x.component(()))
        oracle = vecs @ (np.exp(vals)[..., None] * np.linalg.inv(vecs))
        checks.append(_check(f"form-exp-vs-eig[{tag}]", np.max(np.abs(form_exp(x).component(()) - oracle)), 1e-10))
        checks.append(_check(f"a-hat-flat[{tag}]", (a_hat_form(Form.zero(m, 4)) - Form.constant(m, 1.0)).max_abs(), 0.0))

    m3 = make_torus_grid(3, 12)
    a, b, c = (random_trig_form(m3, 1, 2, rng, max_mode=1) for _ in range(3))
    checks.append(_check("wedge-associativity[T3]", (wedge(wedge(a, b), c) - wedge(a, wedge(b, c))).max_abs(), 1e-10))
    s1, s2 = (random_trig_form(m3, 1, 1, rng, max_mode=1) for _ in range(2))
    checks.append(_check("graded-commutativity[T3]", (wedge(s1, s2) + wedge(s2, s1)).max_abs(), 1e-12))

    # resolution 32 puts the aliasing of g^{-1} below 1e-12 for this metric
    bundle = t3_example_bundle(32)
    g = bundle.metric
    conn = bundle.connection
    checks.append(_check("metric-preservation[unitarized]",
                         metric_compatibility_defect(bundle.unitarized(), g).max_abs(), 1e-10))
    for r in (0.5, -2.0):
        checks.append(_check(f"metric-preservation[r={r:+g}]",
                             metric_compatibility_defect(bundle.deformed(r), g).max_abs(), 1e-10))
    twice = adjoint_connection(adjoint_connection(conn, g), g)
    checks.append(_check("adjoint-involution", (twice.coefficient - conn.coefficient).max_abs(), 1e-11))
    checks.append(_check("adjoint-flat", curvature(adjoint_connection(conn, g)).max_abs(), 1e-9))
    checks.append(_check("deformation-endpoint",
                         (bundle.deformed(1j).coefficient - conn.coefficient).max_abs(), 1e-12))
    omega = bundle.omega()
    gw = omega.left_matmul(g.values)
    checks.append(_check("omega-g-self-adjoint", (gw - gw.dagger()).max_abs(), 1e-11))
    other = FlatBundle(conn, BundleMetric.identity(bundle.manifold, 2))
    for j in (0, 1):
        cj = odd_chern_form(omega, j)
        checks.append(_check(f"odd-chern-closed[j={j}]", exterior_d(cj).max_abs(), 1e-9))
        diff = pair_cycles(cj) - pair_cycles(odd_chern_form(other.omega(), j))
        checks.append(_check(f"odd-chern-metric-independence[j={j}]", diff.max_abs(), 1e-8))

    for s, a_ in ((0.5 + 0.3j, 0.7 - 0.2j), (-1.5, 2.0 + 1.0j), (3.0, 0.25)):
        resid = abs(hurwitz_zeta(s, a_) - hurwitz_zeta(s, a_ + 1) - a_ ** (-s))
        checks.append(_check(f"hurwitz-recurrence[s={s},a={a_}]", resid, 1e-10))
    for a_ in (0.25, 0.7 + 0.4j, 1.0):
        checks.append(_check(f"hurwitz-s0[a={a_}]", abs(hurwitz_zeta(0.0, a_) - (0.5 - a_)), 1e-12))
    return checks


def bundled_configs():
    """``(name, bytes)`` for every example config shipped with the package."""
    root = resources.files("flateta") / "configs"
    return sorted((p.name, p.read_bytes()) for p in root.iterdir() if p.name.endswith(".ini"))


def run_selftest(jobs=1):
    start = time.perf_counter()
    try:
        checks = structural_checks()
    except Exception as exc:
        checks = [Check.failure("structural:error", exc)]
    configs = bundled_configs()

    def one(item):
        name, data = item
        try:
            report = run_experiment(parse_config(data))
        except Exception as exc:
            return [Check.failure(f"{name}:error", exc)]
        return [
            Check(f"{name}/{c.name}", c.lhs, c.rhs, c.residual, c.tolerance, c.passed, c.detail)
            for c in report.checks
        ]

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            groups = list(pool.map(one, configs))
    else:
        groups = [one(item) for item in configs]
    for group in groups:
        checks.extend(group)
    report = Report("selftest", {"configs": [name for name, _ in configs]}, checks)
    report.timings = {"total_seconds": time.perf_counter() - start}
    return report
