"""Experiment reports and their serializations.

JSON layout (``"schema": 1``)::

    {
      "schema": 1,
      "experiment": "theorem-2-2",
      "inputs": {...},                 # echo of the parsed config
      "checks": [                      # sorted by name
        {"name": ..., "lhs": [[re, im], ...], "rhs": [[re, im], ...],
         "residual": float | null, "tolerance": float, "pass": bool,
         "detail": str}
      ],
      "overall_pass": bool,
      "spectra": [{"r": [re, im], "spin": ..., "shifts": [[re, im, multiplicity], ...]}],
      "timings": {"total_seconds": float, ...}
    }

Everything except ``timings`` is a deterministic function of the config.
"""

from __future__ import annotations

import io
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .config import format_complex

__all__ = ["Check", "Report", "emit_report", "SCHEMA_VERSION", "FORMATS"]

SCHEMA_VERSION = 1
FORMATS = ("json", "text", "csv-spectra")


def _as_complex_list(value):
    if value is None:
        return ()
    arr = np.atleast_1d(np.asarray(value, dtype=complex)).ravel()
    return tuple(complex(z) for z in arr)


@dataclass(frozen=True)
class Check:
    """One identity check: both sides, their distance and the verdict."""

    name: str
    lhs: tuple
    rhs: tuple
    residual: float
    tolerance: float
    passed: bool
    detail: str = ""

    @classmethod
    def compare(cls, name, lhs, rhs, residual, tolerance, detail=""):
        residual = float(residual)
        passed = math.isfinite(residual) and residual <= tolerance
        return cls(name, _as_complex_list(lhs), _as_complex_list(rhs), residual, float(tolerance), passed, detail)

    @classmethod
    def failure(cls, name, exc, tolerance=0.0):
        return cls(name, (), (), math.inf, float(tolerance), False, f"{type(exc).__name__}: {exc}")

    def to_dict(self):
        return {
            "name": self.name,
            "lhs": [[z.real, z.imag] for z in self.lhs],
            "rhs": [[z.real, z.imag] for z in self.rhs],
            "residual": self.residual if math.isfinite(self.residual) else None,
            "tolerance": self.tolerance,
            "pass": self.passed,
            "detail": self.detail,
        }


@dataclass
class Report:
    experiment: str
    inputs: dict
    checks: list = field(default_factory=list)
    spectra: list = field(default_factory=list)
    timings: dict = field(default_factory=dict)

    def __post_init__(self):
        self.checks = sorted(self.checks, key=lambda c: c.name)

    @property
    def overall_pass(self):
        return bool(self.checks) and all(c.passed for c in self.checks)

    def failed(self):
        return [c for c in self.checks if not c.passed]

    def to_dict(self):
        return {
            "schema": SCHEMA_VERSION,
            "experiment": self.experiment,
            "inputs": self.inputs,
            "checks": [c.to_dict() for c in self.checks],
            "overall_pass": self.overall_pass,
            "spectra": [
                {
                    "r": [complex(s.r).real, complex(s.r).imag],
                    "spin": s.spin,
                    "shifts": [[c.real, c.imag, m] for c, m in zip(s.shifts, s.multiplicities)],
                }
                for s in self.spectra
            ],
            "timings": self.timings,
        }


def _csv_float(x):
    return f"{0.0 if x == 0 else x:.12g}"


def emit_report(report, format="json"):
    """Serialize a report to bytes in one of :data:`FORMATS`."""
    if format == "json":
        return (json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n").encode("utf-8")
    if format == "csv-spectra":
        buf = io.StringIO()
        buf.write("re,im,multiplicity,r\n")
        for spec in report.spectra:
            for c, m in zip(spec.shifts, spec.multiplicities):
                buf.write(f"{_csv_float(c.real)},{_csv_float(c.imag)},{m},{format_complex(spec.r)}\n")
        return buf.getvalue().encode("utf-8")
    if format == "text":
        width = max((len(c.name) for c in report.checks), default=10)
        lines = [f"experiment: {report.experiment}"]
        for c in report.checks:
            verdict = "PASS" if c.passed else "FAIL"
            res = f"{c.residual:.3e}" if math.isfinite(c.residual) else "inf"
            line = f"{verdict}  {c.name:<{width}}  residual={res}  tol={c.tolerance:.1e}"
            if c.detail:
                line += f"  ({c.detail})"
            lines.append(line)
        lines.append(f"overall: {'PASS' if report.overall_pass else 'FAIL'} "
                     f"({len(report.checks) - len(report.failed())}/{len(report.checks)} checks)")
        return ("\n".join(lines) + "\n").encode("utf-8")
    raise ValueError(f"unknown report format {format!r}; expected one of {FORMATS}")
