import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from flateta.runner.config import (
    DEFAULT_TOLERANCES,
    ConfigError,
    format_complex,
    parse_complex,
    parse_config,
    parse_matrix,
)
from flateta.runner.selftest import bundled_configs

MINIMAL = b"""
[experiment]
name = theorem-2-2

[bundle]
rank = 1
w = 0.3+0.25i
"""


def test_minimal_config_gets_defaults():
    spec = parse_config(MINIMAL)
    assert spec.experiment == "theorem-2-2"
    assert spec.dim == 1 and spec.resolution == 64
    assert spec.quadrature == 32
    assert spec.tol("default") == 1e-8
    assert spec.connection[0][0, 0] == 0.3 + 0.25j
    assert spec.metric is None and spec.spin == "periodic" and spec.e_rank == 1


def test_torus_default_resolution():
    spec = parse_config(b"[experiment]\nname = verify-cs\n[manifold]\ndim = 3\n[bundle]\nrank = 1\nw1 = 0.1\n")
    assert spec.resolution == 16
    assert len(spec.connection) == 3
    assert np.all(spec.connection[1] == 0)


def test_r_grid_order_preserved():
    spec = parse_config(MINIMAL + b"[sweep]\nr_grid = 0, 0.5, 1, i\n")
    assert spec.r_grid == (0, 0.5, 1, 1j)


@pytest.mark.parametrize("text,match", [
    (b"[experiment]\nname = nope\n", "unknown experiment"),
    (b"[experiment]\nname = rho\n[bundle]\nrank = 2\nw = 1, 2; 3\n", "rows have different lengths"),
    (b"[experiment]\nname = rho\n[bundle]\nrank = 2\nw = 1, 2, 3; 4, 5, 6\n", "square"),
    (b"[experiment]\nname = rho\n[bundle]\nrank = 2\nw = 0.3+0.25i\n", "w: matrix is 1x1 but rank = 2"),
    (b"[experiment]\nname = rho\n[bundle]\nrank = 1\nw = 1\nw = 2\n", "duplicate key 'w'"),
    (b"[experiment]\nname = rho\n[bundle]\nrank = 1\nw = 1+2j\n", "imaginary unit"),
    (b"[experiment]\nname = rho\n[bundle]\nrank = 1\nw = abc\n", "malformed complex"),
    (b"[experiment]\nname = rho\n[bundle]\nrank = 1\nw = nan\n", "finite"),
    (b"[experiment]\nname = rho\n[manifold]\ndim = 3\n[bundle]\nrank = 1\n", "circle only"),
    (b"[experiment]\nname = rho\n[manifold]\ndim = 2\n", "expected 1 or 3"),
    (b"[experiment]\nname = rho\n", "needs a \\[bundle\\]"),
    (b"[experiment]\nname = rho\n[bundle]\nrank = 1\nbogus = 1\n", "unknown key"),
    (b"[experiment]\nname = rho\n[bundle]\nrank = 1\n[tolerances]\ndefault = -1\n", "positive"),
    (b"[experiment]\nname = identities\n[sweep]\nr_grid = 0, inf\n", "finite"),
    (b"\xff\xfe", "UTF-8"),
    (b"no section header", "malformed"),
])
def test_parse_errors(text, match):
    with pytest.raises(ConfigError, match=match):
        parse_config(text)


def test_metric_rank_mismatch_names_key():
    text = MINIMAL + b"metric.cos1 = 1, 0; 0, 1\n"
    with pytest.raises(ConfigError, match="metric.cos1"):
        parse_config(text)


def test_parse_matrix_grammar():
    m = parse_matrix("1, 2i; -0.5-1i, 3")
    assert m.shape == (2, 2)
    assert m[0, 1] == 2j and m[1, 0] == -0.5 - 1j
    assert parse_complex(" i ") == 1j
    assert parse_complex("-i") == -1j


@pytest.mark.parametrize("z,text", [(1j, "0+1i"), (0.25 - 0.3j, "0.25-0.3i"), (-2, "-2+0i")])
def test_format_complex(z, text):
    assert format_complex(z) == text


@settings(max_examples=60, deadline=None)
@given(st.complex_numbers(max_magnitude=1e6, allow_nan=False, allow_infinity=False))
def test_complex_literal_round_trip(z):
    assert parse_complex(format_complex(z, exact=True)) == z


@pytest.mark.parametrize("name,data", bundled_configs(), ids=[n for n, _ in bundled_configs()])
def test_bundled_configs_round_trip(name, data):
    spec = parse_config(data)
    again = parse_config(spec.to_config())
    assert again.to_dict() == spec.to_dict()
    for a, b in zip(spec.connection, again.connection):
        assert np.array_equal(a, b)


def test_with_tolerance_overrides_default_only():
    spec = parse_config(MINIMAL).with_tolerance(1e-4)
    assert spec.tol("default") == 1e-4
    assert spec.tol("periods") == DEFAULT_TOLERANCES["periods"]


def test_build_bundle_with_harmonics():
    spec = parse_config(MINIMAL + b"metric = 2\nmetric.cos1 = 0.5\n")
    b = spec.build_bundle()
    assert not b.metric.is_constant()
    assert np.isclose(b.metric.values[0, 0, 0], 2.5)
