"""Command-line front end.

Exit statuses: 0 success, 2 usage error, 3 file could not be read or
written, 4 malformed document, 5 document or option failed validation,
6 analysis failed.  Reports go to standard output, diagnostics to
standard error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__
from .clustering import DEFAULT_COUNT_THRESHOLD, DEFAULT_THRESHOLD_FRACTION
from .pipeline import AnalysisConfig, analyze, render_report, render_tables
from .profile import ProfileParseError, ProfileValidationError, emit_profile, load_profile
from .roughset import WEATHER_TABLE, CoreError, build_discernibility, extract_core
from .synth import SynthSpecError, generate, load_spec

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_IO = 3
EXIT_PARSE = 4
EXIT_VALIDATION = 5
EXIT_ANALYSIS = 6


class CliError(Exception):
    def __init__(self, message: str, status: int):
        super().__init__(message)
        self.status = status


def _write(text: str | bytes, out: str | None) -> None:
    if out is None:
        if isinstance(text, bytes):
            sys.stdout.buffer.write(text)
            sys.stdout.flush()
        else:
            sys.stdout.write(text)
        return
    try:
        Path(out).write_bytes(text if isinstance(text, bytes) else text.encode("utf-8"))
    except OSError as exc:
        raise CliError(f"cannot write {out}: {exc.strerror}", EXIT_IO) from None


def _load(path: str):
    try:
        return load_profile(path)
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc.strerror}", EXIT_IO) from None
    except ProfileParseError as exc:
        raise CliError(f"{path}: {exc}", EXIT_PARSE) from None
    except ProfileValidationError as exc:
        raise CliError(f"{path}: {exc}", EXIT_VALIDATION) from None


def _config(args) -> AnalysisConfig:
    try:
        return AnalysisConfig(args.threshold_fraction, args.count_threshold)
    except ValueError as exc:
        raise CliError(str(exc), EXIT_VALIDATION) from None


def result_json(doc: dict) -> str:
    return json.dumps(doc, indent=2) + "\n"


def cmd_analyze(args) -> int:
    profile = _load(args.profile)
    cfg = _config(args)
    try:
        doc = analyze(profile, cfg)
    except (CoreError, ValueError) as exc:
        raise CliError(f"analysis failed: {exc}", EXIT_ANALYSIS) from None
    _write(result_json(doc) if args.json else render_report(doc), args.out)
    if args.figures:
        from .plots import render_figures

        try:
            paths = render_figures(profile, doc, args.figures)
        except OSError as exc:
            raise CliError(f"cannot write figures to {args.figures}: {exc.strerror}", EXIT_IO) from None
        for p in paths:
            print(f"wrote {p}", file=sys.stderr)
    return EXIT_OK


def cmd_report(args) -> int:
    try:
        doc = json.loads(Path(args.result).read_text(encoding="utf-8"))
    except OSError as exc:
        raise CliError(f"cannot read {args.result}: {exc.strerror}", EXIT_IO) from None
    except json.JSONDecodeError as exc:
        raise CliError(f"{args.result}: line {exc.lineno}, column {exc.colno}: {exc.msg}", EXIT_PARSE) from None
    try:
        text = render_report(doc)
    except (KeyError, TypeError, ValueError) as exc:
        raise CliError(f"{args.result}: not a valid result document ({exc})", EXIT_VALIDATION) from None
    _write(text, args.out)
    return EXIT_OK


def cmd_synth(args) -> int:
    try:
        spec = load_spec(args.spec)
    except OSError as exc:
        raise CliError(f"cannot read {args.spec}: {exc.strerror}", EXIT_IO) from None
    except SynthSpecError as exc:
        status = EXIT_PARSE if str(exc).startswith("line ") else EXIT_VALIDATION
        raise CliError(f"{args.spec}: {exc}", status) from None
    profile = generate(spec, args.seed)
    data = emit_profile(profile)
    _write(data, args.out)
    kinds = ", ".join(f"{inj.kind.value} on region {inj.target}" for inj in spec.injections) or "none"
    print(
        f"{args.out}: {profile.process_count} processes, {profile.region_count} regions, "
        f"seed {args.seed}, injections: {kinds}, {len(data)} bytes"
    )
    return EXIT_OK


def cmd_tables(args) -> int:
    if args.demo:
        matrix = build_discernibility(WEATHER_TABLE)
        text = "\n".join([
            "Decision table",
            WEATHER_TABLE.render(),
            "",
            "Discernibility matrix",
            matrix.render(),
            "",
            "core: " + extract_core(matrix).render(),
            "",
        ])
        _write(text, args.out)
        return EXIT_OK
    if not args.profile:
        raise CliError("tables needs a profile path or --demo", EXIT_USAGE)
    profile = _load(args.profile)
    try:
        text = render_tables(profile, _config(args))
    except (CoreError, ValueError) as exc:
        raise CliError(f"analysis failed: {exc}", EXIT_ANALYSIS) from None
    _write(text, args.out)
    return EXIT_OK


def _add_thresholds(p: argparse.ArgumentParser) -> None:
    p.add_argument("--threshold-fraction", type=float, default=DEFAULT_THRESHOLD_FRACTION,
                   help="neighbourhood radius as a fraction of the seed vector length (default %(default)s)")
    p.add_argument("--count-threshold", type=int, default=DEFAULT_COUNT_THRESHOLD,
                   help="a seed forms a cluster when more than this many vectors are near it (default %(default)s)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="spmdperf", description="Bottleneck analysis for SPMD performance profiles.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="detect bottlenecks and their root causes")
    p.add_argument("profile")
    _add_thresholds(p)
    p.add_argument("--out", help="write the report here instead of standard output")
    p.add_argument("--json", action="store_true", help="emit the machine-readable result document")
    p.add_argument("--figures", metavar="DIR", help="also render PNG figures into DIR")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("report", help="re-render the text report from a saved result document")
    p.add_argument("result")
    p.add_argument("--out")
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("synth", help="generate a synthetic profile from a spec document")
    p.add_argument("spec")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("tables", help="print decision tables and discernibility matrices")
    p.add_argument("profile", nargs="?")
    p.add_argument("--demo", action="store_true", help="use the built-in four-entry weather table")
    _add_thresholds(p)
    p.add_argument("--out")
    p.set_defaults(func=cmd_tables)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"spmdperf: {exc}", file=sys.stderr)
        return exc.status
