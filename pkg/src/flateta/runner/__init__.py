"""Experiment configs, orchestration, reports and the command line."""

from .config import ConfigError, ExperimentSpec, format_complex, parse_complex, parse_config, parse_matrix
from .experiments import identity_checks, run_experiment
from .report import Check, Report, emit_report

__all__ = [
    "Check",
    "ConfigError",
    "ExperimentSpec",
    "Report",
    "emit_report",
    "format_complex",
    "identity_checks",
    "parse_complex",
    "parse_config",
    "parse_matrix",
    "run_experiment",
]
