"""Experiment configuration files.

The format is a sectioned key-value document (``configparser`` syntax with
duplicate keys forbidden).  Complex literals are written ``a+bi`` (``i``
alone is the imaginary unit) and matrices are row-major with ``,`` between
entries and ``;`` between rows::

    [experiment]
    name = theorem-2-2

    [manifold]
    dim = 1
    resolution = 64

    [bundle]
    rank = 2
    w1 = 0.3+0.25i, 0; 0, -0.2+0.1i
    metric = 1, 0; 0, 2
    metric.cos1 = 0.3, 0; 0, 0.5
    e_rank = 1
    spin = periodic

    [sweep]
    r_grid = 0, 0.5, -0.5, 1, -1, 2, -2

    [tolerances]
    default = 1e-8

    [output]
    report = out/theorem.json
    spectra = out/theorem.csv
"""

from __future__ import annotations

import configparser
import math
from dataclasses import dataclass, field, replace

import numpy as np

from ..bundle import BundleMetric, FlatBundle, flat_connection
from ..geometry import make_torus_grid

__all__ = [
    "ConfigError",
    "ExperimentSpec",
    "EXPERIMENTS",
    "DEFAULT_TOLERANCES",
    "parse_config",
    "parse_complex",
    "parse_matrix",
    "format_complex",
    "format_matrix",
]

EXPERIMENTS = ("verify-cs", "verify-prop21", "eta-defect", "theorem-2-2", "rho", "identities")
CIRCLE_ONLY = ("eta-defect", "theorem-2-2", "rho")

DEFAULT_TOLERANCES = {
    "default": 1e-8,
    "dcs": 1e-8,
    "periods": 1e-7,
    "reality": 1e-9,
    "eta_reality": 1e-11,
    "fit_residual": 1e-9,
    "decomposition": 1e-9,
    "quadrature": 1e-10,
    "a_coeff": 1e-12,
    "spin": 1e-10,
}

DEFAULT_RESOLUTION = {1: 64, 3: 16}

DEFAULT_R_GRID = {
    "verify-cs": (1.0, 1j),
    "verify-prop21": (-2.0, -1.0, -0.5, 0.5, 1.0, 2.0, 1j),
    "eta-defect": (0.0, 0.5, -0.5, 1.0, -1.0, 2.0, -2.0),
    "theorem-2-2": (0.0, 0.5, -0.5, 1.0, -1.0, 2.0, -2.0),
    "rho": (),
    "identities": (),
}

_ALLOWED = {
    "experiment": {"name", "description"},
    "manifold": {"dim", "resolution"},
    "bundle": {"rank", "w", "w1", "w2", "w3", "metric", "e_rank", "spin"}
    | {f"metric.{kind}{axis}" for kind in ("cos", "sin") for axis in (1, 2, 3)},
    "sweep": {"r_grid", "quadrature", "jmax"},
    "tolerances": set(DEFAULT_TOLERANCES),
    "output": {"report", "spectra", "format"},
}


class ConfigError(ValueError):
    """Malformed or inconsistent experiment configuration."""


def parse_complex(text, key="value"):
    raw = text.strip().replace(" ", "")
    if not raw:
        raise ConfigError(f"{key}: empty complex literal")
    if "inf" in raw.lower() or "nan" in raw.lower():
        raise ConfigError(f"{key}: value must be finite, got {text!r}")
    if raw.lower().endswith("j"):
        raise ConfigError(f"{key}: use 'i' for the imaginary unit, got {text!r}")
    try:
        z = complex(raw.replace("i", "j"))
    except ValueError:
        raise ConfigError(f"{key}: malformed complex literal {text!r}") from None
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise ConfigError(f"{key}: value must be finite, got {text!r}")
    return z


def parse_matrix(text, key="matrix"):
    rows = [row for row in text.strip().split(";")]
    if not rows or any(not row.strip() for row in rows):
        raise ConfigError(f"{key}: malformed matrix literal {text!r}")
    parsed = [[parse_complex(entry, key) for entry in row.split(",")] for row in rows]
    width = len(parsed[0])
    if any(len(row) != width for row in parsed):
        raise ConfigError(f"{key}: rows have different lengths")
    if width != len(parsed):
        raise ConfigError(f"{key}: matrix is {len(parsed)}x{width}, not square")
    return np.array(parsed, dtype=complex)


def format_complex(z, exact=False):
    """``a+bi`` literal; ``exact`` keeps full round-trip precision."""
    z = complex(z)
    re = 0.0 if z.real == 0 else z.real
    im = 0.0 if z.imag == 0 else z.imag
    if exact:
        return f"{re!r}{im:+}i"
    return f"{re:.12g}{im:+.12g}i"


def format_matrix(mat, exact=False):
    return "; ".join(", ".join(format_complex(z, exact) for z in row) for row in np.asarray(mat))


@dataclass(frozen=True)
class ExperimentSpec:
    experiment: str
    dim: int = 1
    resolution: int = 64
    rank: int = 1
    connection: tuple = ()
    metric: np.ndarray | None = None
    metric_harmonics: dict = field(default_factory=dict)
    e_rank: int = 1
    spin: str = "periodic"
    r_grid: tuple = ()
    quadrature: int = 32
    jmax: int = 20
    tolerances: dict = field(default_factory=lambda: dict(DEFAULT_TOLERANCES))
    outputs: dict = field(default_factory=dict)
    description: str = ""

    @property
    def needs_bundle(self):
        return self.experiment != "identities"

    def tol(self, name):
        return self.tolerances.get(name, self.tolerances["default"])

    def with_tolerance(self, value):
        tols = dict(self.tolerances)
        tols["default"] = float(value)
        return replace(self, tolerances=tols)

    def manifold(self):
        return make_torus_grid(self.dim, self.resolution)

    def build_bundle(self):
        m = self.manifold()
        base = self.metric if self.metric is not None else np.eye(self.rank)
        harmonics = {(axis - 1, kind): mat for (axis, kind), mat in self.metric_harmonics.items()}
        g = BundleMetric.harmonic(m, base, harmonics)
        return FlatBundle(flat_connection(m, list(self.connection)), g)

    def to_dict(self):
        """Plain-data echo of the spec, used in reports."""
        out = {
            "experiment": self.experiment,
            "manifold": {"dim": self.dim, "resolution": self.resolution},
            "sweep": {
                "r_grid": [format_complex(r) for r in self.r_grid],
                "quadrature": self.quadrature,
                "jmax": self.jmax,
            },
            "tolerances": {k: self.tolerances[k] for k in sorted(self.tolerances)},
        }
        if self.needs_bundle:
            out["bundle"] = {
                "rank": self.rank,
                "connection": [format_matrix(w) for w in self.connection],
                "metric": format_matrix(self.metric if self.metric is not None else np.eye(self.rank)),
                "metric_harmonics": {
                    f"{kind}{axis}": format_matrix(mat)
                    for (axis, kind), mat in sorted(self.metric_harmonics.items())
                },
                "e_rank": self.e_rank,
                "spin": self.spin,
            }
        return out

    def to_config(self):
        """Serialize back to the config grammar."""
        lines = ["[experiment]", f"name = {self.experiment}"]
        if self.description:
            lines.append(f"description = {self.description}")
        lines += ["", "[manifold]", f"dim = {self.dim}", f"resolution = {self.resolution}"]
        if self.needs_bundle:
            lines += ["", "[bundle]", f"rank = {self.rank}"]
            for k, w in enumerate(self.connection):
                lines.append(f"w{k + 1} = {format_matrix(w, exact=True)}")
            if self.metric is not None:
                lines.append(f"metric = {format_matrix(self.metric, exact=True)}")
            for (axis, kind), mat in sorted(self.metric_harmonics.items()):
                lines.append(f"metric.{kind}{axis} = {format_matrix(mat, exact=True)}")
            lines += [f"e_rank = {self.e_rank}", f"spin = {self.spin}"]
        lines += ["", "[sweep]"]
        if self.r_grid:
            lines.append("r_grid = " + ", ".join(format_complex(r, exact=True) for r in self.r_grid))
        lines += [f"quadrature = {self.quadrature}", f"jmax = {self.jmax}"]
        lines += ["", "[tolerances]"]
        lines += [f"{k} = {self.tolerances[k]!r}" for k in sorted(self.tolerances)]
        if self.outputs:
            lines += ["", "[output]"]
            lines += [f"{k} = {v}" for k, v in sorted(self.outputs.items())]
        return "\n".join(lines) + "\n"


def _int(section, key, minimum=None):
    raw = section[key].strip()
    try:
        value = int(raw)
    except ValueError:
        raise ConfigError(f"{key}: expected an integer, got {raw!r}") from None
    if minimum is not None and value < minimum:
        raise ConfigError(f"{key}: must be >= {minimum}, got {value}")
    return value


def _float(section, key):
    raw = section[key].strip()
    try:
        value = float(raw)
    except ValueError:
        raise ConfigError(f"{key}: expected a number, got {raw!r}") from None
    if not (math.isfinite(value) and value > 0):
        raise ConfigError(f"{key}: must be a positive finite number")
    return value


def parse_config(text):
    """Parse and validate a configuration document (bytes or str)."""
    if isinstance(text, bytes):
        try:
            text = text.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise ConfigError(f"config is not valid UTF-8: {exc}") from None
    parser = configparser.ConfigParser(strict=True, interpolation=None, default_section="__defaults__")
    try:
        parser.read_string(text)
    except configparser.DuplicateOptionError as exc:
        raise ConfigError(f"duplicate key {exc.option!r} in section [{exc.section}]") from None
    except configparser.DuplicateSectionError as exc:
        raise ConfigError(f"duplicate section [{exc.section}]") from None
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}") from None

    for name in parser.sections():
        if name not in _ALLOWED:
            raise ConfigError(f"unknown section [{name}]")
        unknown = set(parser[name]) - _ALLOWED[name]
        if unknown:
            raise ConfigError(f"unknown key(s) in [{name}]: {', '.join(sorted(unknown))}")

    if not parser.has_section("experiment") or "name" not in parser["experiment"]:
        raise ConfigError("missing [experiment] name")
    experiment = parser["experiment"]["name"].strip()
    if experiment not in EXPERIMENTS:
        raise ConfigError(f"unknown experiment {experiment!r}; expected one of {', '.join(EXPERIMENTS)}")
    description = parser["experiment"].get("description", "").strip()

    kwargs = {"experiment": experiment, "description": description}
    man = parser["manifold"] if parser.has_section("manifold") else {}
    dim = _int(man, "dim") if "dim" in man else 1
    if dim not in (1, 3):
        raise ConfigError(f"dim: expected 1 or 3, got {dim}")
    if experiment in CIRCLE_ONLY and dim != 1:
        raise ConfigError(f"dim: experiment {experiment!r} runs on the circle only")
    resolution = _int(man, "resolution", minimum=4) if "resolution" in man else DEFAULT_RESOLUTION[dim]
    if resolution % 2:
        raise ConfigError(f"resolution: must be even, got {resolution}")
    kwargs.update(dim=dim, resolution=resolution)

    if experiment != "identities":
        if not parser.has_section("bundle"):
            raise ConfigError(f"experiment {experiment!r} needs a [bundle] section")
        kwargs.update(_parse_bundle(parser["bundle"], dim))

    sweep = parser["sweep"] if parser.has_section("sweep") else {}
    if "r_grid" in sweep:
        entries = [e for e in sweep["r_grid"].split(",")]
        kwargs["r_grid"] = tuple(parse_complex(e, "r_grid") for e in entries)
    else:
        kwargs["r_grid"] = DEFAULT_R_GRID[experiment]
    if "quadrature" in sweep:
        kwargs["quadrature"] = _int(sweep, "quadrature", minimum=2)
    if "jmax" in sweep:
        kwargs["jmax"] = _int(sweep, "jmax", minimum=0)

    tols = dict(DEFAULT_TOLERANCES)
    if parser.has_section("tolerances"):
        for key in parser["tolerances"]:
            tols[key] = _float(parser["tolerances"], key)
    kwargs["tolerances"] = tols

    if parser.has_section("output"):
        outputs = {k: v.strip() for k, v in parser["output"].items()}
        if "format" in outputs and outputs["format"] not in ("json", "text", "csv-spectra"):
            raise ConfigError(f"format: unknown report format {outputs['format']!r}")
        kwargs["outputs"] = outputs
    return ExperimentSpec(**kwargs)


def _parse_bundle(section, dim):
    if "rank" not in section:
        raise ConfigError("rank: missing in [bundle]")
    rank = _int(section, "rank", minimum=1)
    names = [f"w{k}" for k in range(1, dim + 1)]
    if dim == 1 and "w" in section:
        if "w1" in section:
            raise ConfigError("w: give either w or w1, not both")
        raw = {"w1": section["w"]}
        written = {"w1": "w"}
    else:
        if "w" in section:
            raise ConfigError("w: only allowed on the circle; use w1..w3")
        raw = {k: section[k] for k in names if k in section}
        written = {k: k for k in names}
    extra = [k for k in ("w1", "w2", "w3") if k in section and k not in names]
    if extra:
        raise ConfigError(f"{extra[0]}: dim = {dim} has no such axis")
    mats = []
    for key in names:
        if key not in raw:
            mats.append(np.zeros((rank, rank), dtype=complex))
            continue
        label = written[key]
        mat = parse_matrix(raw[key], label)
        if mat.shape[0] != rank:
            raise ConfigError(f"{label}: matrix is {mat.shape[0]}x{mat.shape[0]} but rank = {rank}")
        mats.append(mat)

    metric = None
    if "metric" in section:
        metric = parse_matrix(section["metric"], "metric")
        if metric.shape[0] != rank:
            raise ConfigError(f"metric: matrix is {metric.shape[0]}x{metric.shape[0]} but rank = {rank}")
    harmonics = {}
    for key in section:
        if not key.startswith("metric."):
            continue
        tag = key.split(".", 1)[1]
        kind, axis = tag[:3], int(tag[3:])
        if axis > dim:
            raise ConfigError(f"{key}: dim = {dim} has no axis {axis}")
        mat = parse_matrix(section[key], key)
        if mat.shape[0] != rank:
            raise ConfigError(f"{key}: matrix is {mat.shape[0]}x{mat.shape[0]} but rank = {rank}")
        harmonics[(axis, kind)] = mat

    e_rank = _int(section, "e_rank", minimum=1) if "e_rank" in section else 1
    spin = section.get("spin", "periodic").strip()
    if spin not in ("periodic", "antiperiodic"):
        raise ConfigError(f"spin: expected periodic or antiperiodic, got {spin!r}")
    return {
        "rank": rank,
        "connection": tuple(mats),
        "metric": metric,
        "metric_harmonics": harmonics,
        "e_rank": e_rank,
        "spin": spin,
    }
