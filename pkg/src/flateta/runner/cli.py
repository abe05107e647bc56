"""Command line entry point.

Exit codes: 0 when every check passes, 1 when at least one check fails,
2 for usage errors and unreadable or invalid configs.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .config import ConfigError, ExperimentSpec, parse_config
from .experiments import run_experiment
from .report import FORMATS, emit_report
from .selftest import run_selftest

__all__ = ["main", "build_parser"]

EXIT_PASS, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _positive_int(text):
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return value


def _nonneg_int(text):
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if value < 0:
        raise argparse.ArgumentTypeError("must be >= 0")
    return value


def _positive_float(text):
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number, got {text!r}") from None
    if not value > 0 or value == float("inf"):
        raise argparse.ArgumentTypeError("must be a positive finite number")
    return value


def build_parser():
    parser = _Parser(prog="flateta", description="Verify C/Z eta invariants of non-unitary flat bundles.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    run = sub.add_parser("run", help="run the experiment described by a config file")
    run.add_argument("config", help="path to the experiment config")
    run.add_argument("--format", choices=FORMATS, default=None, help="report format (default: json)")
    run.add_argument("--out", default=None, help="write the report here instead of stdout")
    run.add_argument("--jobs", type=_positive_int, default=1, help="worker threads")
    run.add_argument("--tolerance", type=_positive_float, default=None, help="override the default tolerance")

    ident = sub.add_parser("identities", help="run the a_j coefficient identity suite")
    ident.add_argument("--jmax", type=_nonneg_int, default=20)
    ident.add_argument("--format", choices=FORMATS, default="text")
    ident.add_argument("--out", default=None)

    st = sub.add_parser("selftest", help="structural invariants plus all bundled example configs")
    st.add_argument("--jobs", type=_positive_int, default=1)
    st.add_argument("--format", choices=FORMATS, default="text")
    st.add_argument("--out", default=None)
    return parser


def _write(data, path):
    if path is None:
        sys.stdout.buffer.write(data)
        sys.stdout.buffer.flush()
        return
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    target.write_bytes(data)


def _cmd_run(args):
    try:
        data = Path(args.config).read_bytes()
    except OSError as exc:
        print(f"flateta: cannot read config: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        spec = parse_config(data)
    except ConfigError as exc:
        print(f"flateta: invalid config: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if args.tolerance is not None:
        spec = spec.with_tolerance(args.tolerance)
    report = run_experiment(spec, jobs=args.jobs)

    fmt = args.format or spec.outputs.get("format", "json")
    # relative output paths in the config resolve against the config's directory
    base = Path(args.config).resolve().parent
    out = args.out
    if out is None and "report" in spec.outputs:
        out = base / spec.outputs["report"]
    _write(emit_report(report, fmt), out)
    if "spectra" in spec.outputs:
        _write(emit_report(report, "csv-spectra"), base / spec.outputs["spectra"])
    return EXIT_PASS if report.overall_pass else EXIT_FAIL


def _cmd_identities(args):
    report = run_experiment(ExperimentSpec("identities", jmax=args.jmax))
    _write(emit_report(report, args.format), args.out)
    return EXIT_PASS if report.overall_pass else EXIT_FAIL


def _cmd_selftest(args):
    report = run_selftest(jobs=args.jobs)
    _write(emit_report(report, args.format), args.out)
    return EXIT_PASS if report.overall_pass else EXIT_FAIL


def main(argv=None):
    args = build_parser().parse_args(argv)
    handler = {"run": _cmd_run, "identities": _cmd_identities, "selftest": _cmd_selftest}[args.command]
    try:
        return handler(args)
    except OSError as exc:
        print(f"flateta: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
