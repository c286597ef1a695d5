"""Command-line entry point: scaffold, compile, validate, simulate, serve.

Diagnostics go to stderr, data to stdout, so the commands compose in
pipelines.  With ``--format json`` stdout is a single JSON document.
Exit codes: 0 success, 1 diagnostics with at least one error (or a failed
run), 2 usage errors.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import zipfile
from pathlib import Path

from .engine import EngineError, FeedbackPolicy, Timing, report_json, report_to_dict
from .model import BundleError, load_case_bundle, parse_case_bundle
from .skins import SKINS
from .trace import ScriptError, run_script
from .workbook import (
    compile_workbook,
    lint_workbook,
    scaffold_workbook,
    write_bundle,
)

EXIT_OK = 0
EXIT_ERRORS = 1
EXIT_USAGE = 2


def _print_diagnostics(diagnostics, as_json: bool) -> None:
    if as_json:
        return  # included in the JSON document instead
    for diag in diagnostics:
        print(str(diag), file=sys.stderr)


def _diagnostics_doc(diagnostics) -> list[dict]:
    return [
        {
            "severity": d.severity,
            "sheet": d.sheet,
            "row": d.row,
            "column": d.column,
            "message": d.message,
        }
        for d in diagnostics
    ]


def _emit(doc: dict, as_json: bool) -> None:
    if as_json:
        print(json.dumps(doc, indent=2, sort_keys=True))


def cmd_scaffold(args) -> int:
    try:
        scaffold_workbook(args.target, args.skin)
    except (FileExistsError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERRORS
    _emit({"target": str(args.target), "skin": args.skin}, args.format == "json")
    if args.format != "json":
        print(f"wrote {args.skin} workbook to {args.target}")
    return EXIT_OK


def cmd_compile(args) -> int:
    case, diagnostics = compile_workbook(args.workbook)
    _print_diagnostics(diagnostics, args.format == "json")
    errors = [d for d in diagnostics if d.severity == "error"]
    doc = {"diagnostics": _diagnostics_doc(diagnostics), "case_id": None, "output": None}
    if case is None or errors:
        _emit(doc, args.format == "json")
        return EXIT_ERRORS
    output = Path(args.output)
    if output.suffix == ".zip":
        bundle_dir = output.with_suffix("")
        write_bundle(case, args.workbook, bundle_dir)
        with zipfile.ZipFile(output, "w", zipfile.ZIP_DEFLATED) as zf:
            for path in sorted(bundle_dir.rglob("*")):
                if path.is_file():
                    zf.write(path, path.relative_to(bundle_dir).as_posix())
    else:
        write_bundle(case, args.workbook, output)
    doc["case_id"] = case.id
    doc["output"] = str(output)
    _emit(doc, args.format == "json")
    if args.format != "json":
        print(f"compiled '{case.id}' -> {output}")
    return EXIT_OK


def cmd_validate(args) -> int:
    diagnostics = lint_workbook(args.workbook)
    _print_diagnostics(diagnostics, args.format == "json")
    _emit({"diagnostics": _diagnostics_doc(diagnostics)}, args.format == "json")
    has_errors = any(d.severity == "error" for d in diagnostics)
    if args.strict and diagnostics:
        return EXIT_ERRORS
    return EXIT_ERRORS if has_errors else EXIT_OK


def _load_bundle_arg(path: Path):
    if path.is_dir():
        return load_case_bundle(path)
    if path.suffix == ".zip":
        with zipfile.ZipFile(path) as zf:
            return parse_case_bundle(zf.read("case.json").decode("utf-8"))
    return parse_case_bundle(path.read_text(encoding="utf-8"))


def cmd_simulate(args) -> int:
    try:
        case = _load_bundle_arg(Path(args.bundle))
    except (OSError, KeyError, zipfile.BadZipFile, BundleError) as exc:
        print(f"error: cannot load bundle: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        script = Path(args.script).read_text(encoding="utf-8")
    except OSError as exc:
        print(f"error: cannot read script: {exc}", file=sys.stderr)
        return EXIT_USAGE
    policy = FeedbackPolicy(answers=Timing(args.answers), scores=Timing(args.scores))
    try:
        report, _session = run_script(
            case,
            script,
            policy,
            start_time=float(args.seed),
            allow_free_anywhere=args.allow_free,
        )
    except ScriptError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except EngineError as exc:
        print(f"error: illegal play: {exc}", file=sys.stderr)
        return EXIT_ERRORS
    if report is None:
        print("error: the script never diagnosed the case", file=sys.stderr)
        return EXIT_ERRORS
    if args.format == "json":
        print(json.dumps(report_to_dict(report), indent=2, sort_keys=True))
    else:
        sys.stdout.write(report_json(report))
    return EXIT_OK


def cmd_serve(args) -> int:
    store_dir = Path(args.store)
    if store_dir.exists() and not store_dir.is_dir():
        print(f"error: store path '{store_dir}' is not a directory", file=sys.stderr)
        return EXIT_USAGE
    try:
        import uvicorn
    except ImportError:
        print("error: uvicorn is required for serving", file=sys.stderr)
        return EXIT_ERRORS
    from .service import create_app
    from .store import Store

    ui_dir = Path(args.ui) if args.ui else None
    app = create_app(Store(store_dir), ui_dir=ui_dir)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="casegen",
        description="Author, compile, play and serve case-study learning games.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("scaffold", help="write a starter workbook for a domain skin")
    p.add_argument("target", help="directory to create")
    p.add_argument("--skin", choices=sorted(SKINS), default="generic")
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.set_defaults(func=cmd_scaffold)

    p = sub.add_parser("compile", help="compile a workbook into a case bundle")
    p.add_argument("workbook", help="workbook directory")
    p.add_argument("-o", "--output", required=True,
                   help="bundle output directory (or .zip path)")
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.set_defaults(func=cmd_compile)

    p = sub.add_parser("validate", help="report workbook diagnostics, incl. lint")
    p.add_argument("workbook", help="workbook directory")
    p.add_argument("--strict", action="store_true",
                   help="treat warnings as failures")
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("simulate", help="run a scripted trace against a bundle")
    p.add_argument("bundle", help="bundle directory, case.json or .zip")
    p.add_argument("script", help="trace script file")
    p.add_argument("--answers", choices=("immediate", "end"), default="end")
    p.add_argument("--scores", choices=("immediate", "end"), default="end")
    p.add_argument("--allow-free", action="store_true",
                   help="accept free-text answers on every slot")
    p.add_argument("--seed", type=int, default=0,
                   help="origin timestamp of the simulated clock")
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("serve", help="run the session service")
    p.add_argument("--store", default=os.environ.get("CASEGEN_STORE", "store"),
                   help="store directory (env CASEGEN_STORE)")
    p.add_argument("--port", type=int,
                   default=int(os.environ.get("CASEGEN_PORT", "8000")),
                   help="listen port (env CASEGEN_PORT)")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--ui", default=None,
                   help="directory of static player UI assets to serve at /")
    p.set_defaults(func=cmd_serve)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
