"""``provdelta`` command line.

Exit codes: 0 identical (or similarity at/above threshold), 1 divergent,
2 usage, parse or validation error.
"""

from __future__ import annotations

import argparse
import json
import logging
import mimetypes
import sys
from pathlib import Path

from .ddiff import (
    DEFAULT_ALPHA,
    DEFAULT_THRESHOLD,
    MODEL_MIME,
    AncovaError,
    ComparatorError,
    ComparatorRegistry,
    ModelPredictions,
    XMLDiffError,
    ancova_model_diff,
)
from .model import validate
from .pdiff import diff_runs
from .report import DiffReport
from .sim import OracleLimitError, SpecError, brute_force_delta, load_scenario
from .traceio import TraceSemanticError, TraceSyntaxError, export_delta_graphml, load_document, read_trace, write_trace

log = logging.getLogger("provdelta")


class CLIError(Exception):
    pass


def _registry(args) -> ComparatorRegistry:
    if not 0.0 <= args.threshold <= 1.0:
        raise CLIError("--threshold must lie in [0, 1]")
    if not 0.0 < args.alpha < 1.0:
        raise CLIError("--alpha must lie in (0, 1)")
    return ComparatorRegistry.default(
        args.threshold,
        alpha=args.alpha,
        ignore_case=args.ignore_case,
        ignore_whitespace=args.ignore_whitespace,
    )


def _loader(trace_path: str):
    base = Path(trace_path).resolve().parent

    def load(ref: str) -> bytes:
        return (base / ref).read_bytes()

    return load


def _diff(args):
    left, right = read_trace(args.left), read_trace(args.right)
    run = diff_runs(left, right, _registry(args), _loader(args.left), _loader(args.right))
    report = DiffReport.from_run(run)
    if args.out:
        Path(args.out).write_bytes(export_delta_graphml(run.delta))
    if args.plot:
        from .plotting import plot_delta

        plot_delta(run.delta, args.plot)
    return report


def cmd_diff(args) -> int:
    report = _diff(args)
    sys.stdout.write(report.render(args.format))
    return report.exit_code


def cmd_export(args) -> int:
    left, right = read_trace(args.left), read_trace(args.right)
    run = diff_runs(left, right, _registry(args), _loader(args.left), _loader(args.right))
    data = export_delta_graphml(run.delta)
    if args.out:
        Path(args.out).write_bytes(data)
    else:
        sys.stdout.buffer.write(data)
        sys.stdout.flush()
    return 0


def cmd_validate(args) -> int:
    trace = load_document(Path(args.trace).read_bytes())
    problems = validate(trace)
    if args.format == "json":
        doc = [{"invariant": v.invariant, "ids": list(v.ids), "message": v.message} for v in problems]
        sys.stdout.write(json.dumps({"valid": not problems, "violations": doc}, indent=2) + "\n")
    else:
        for v in problems:
            sys.stdout.write(f"{v}\n")
        sys.stdout.write("valid\n" if not problems else f"{len(problems)} violation(s)\n")
    return 0 if not problems else 1


def cmd_data_diff(args) -> int:
    registry = _registry(args)
    mime = args.mime or mimetypes.guess_type(args.left)[0]
    if not registry.knows(mime) and not args.fallback:
        raise CLIError(f"no comparator for MIME type {mime!r}; pass --fallback for byte equality")
    left, right = Path(args.left).read_bytes(), Path(args.right).read_bytes()
    score = registry.similarity(left, right, mime)
    result = None
    if mime == MODEL_MIME:
        ml, mr = ModelPredictions.from_csv(left), ModelPredictions.from_csv(right)
        result = ancova_model_diff(ml, mr, args.alpha)
        if args.plot:
            from .plotting import plot_model_fit

            plot_model_fit(ml, mr, result, args.plot)
    ok = score >= registry.threshold
    if args.format == "json":
        doc = {"mimeType": mime, "similarity": score, "threshold": registry.threshold, "match": ok}
        if result is not None:
            doc["ancova"] = result.as_dict()
        sys.stdout.write(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    elif args.format == "csv":
        sys.stdout.write("mimeType,similarity,threshold,match\n")
        sys.stdout.write(f"{mime},{score!r},{registry.threshold!r},{str(ok).lower()}\n")
    else:
        sys.stdout.write(f"mime: {mime}\nsimilarity: {score:.6f}\nthreshold: {registry.threshold}\n")
        if result is not None:
            sys.stdout.write(
                f"slope: F={result.slope_f:.6g} p={result.slope_p:.6g}\n"
                f"intercept: F={result.intercept_f:.6g} p={result.intercept_p:.6g}\n"
                f"equivalent: {str(result.equivalent).lower()}\n"
            )
    return 0 if ok else 1


def cmd_simulate(args) -> int:
    scenario = load_scenario(args.scenario)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    run_a, run_b = scenario.run()
    for name, run in (("traceA.json", run_a), ("traceB.json", run_b)):
        write_trace(run.trace, out / name)
        for ref, content in run.contents.items():
            target = out / ref
            target.parent.mkdir(parents=True, exist_ok=True)
            target.write_bytes(content)
    expected = {"scenario": scenario.classify().value}
    try:
        records = brute_force_delta(run_a.trace, run_b.trace)
        expected["mismatches"] = sorted([l, r] for l, r in records)
    except OracleLimitError as exc:
        log.warning("no ground truth: %s", exc)
        expected["mismatches"] = None
    (out / "expected.json").write_text(json.dumps(expected, indent=2, sort_keys=True, default=str) + "\n")
    sys.stdout.write(f"wrote {out / 'traceA.json'}, {out / 'traceB.json'}, {out / 'expected.json'}\n")
    return 0


def _add_registry_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--threshold", type=float, default=DEFAULT_THRESHOLD, help="similarity at or above which data match")
    p.add_argument("--alpha", type=float, default=DEFAULT_ALPHA, help="significance level for model comparison")
    p.add_argument("--ignore-case", action="store_true")
    p.add_argument("--ignore-whitespace", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="provdelta", description="Explain divergence between workflow runs.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("diff", help="diff two trace files")
    p.add_argument("left")
    p.add_argument("right")
    p.add_argument("--out", help="write the delta graph as GraphML")
    p.add_argument("--plot", help="render the delta graph to an image file")
    p.add_argument("--format", choices=("text", "json", "csv"), default="text")
    _add_registry_flags(p)
    p.set_defaults(func=cmd_diff)

    p = sub.add_parser("data-diff", help="compare two data files")
    p.add_argument("left")
    p.add_argument("right")
    p.add_argument("--mime", help="MIME type; guessed from the file name when absent")
    p.add_argument("--fallback", action="store_true", help="use byte equality for unknown types")
    p.add_argument("--plot", help="for model predictions, render both fitted lines")
    p.add_argument("--format", choices=("text", "json", "csv"), default="text")
    _add_registry_flags(p)
    p.set_defaults(func=cmd_data_diff)

    p = sub.add_parser("simulate", help="run a scenario file into two traces and ground truth")
    p.add_argument("scenario")
    p.add_argument("--out-dir", default=".")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("validate", help="check a trace file against the model invariants")
    p.add_argument("trace")
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("export", help="write the delta of two traces as GraphML")
    p.add_argument("left")
    p.add_argument("right")
    p.add_argument("--out")
    _add_registry_flags(p)
    p.set_defaults(func=cmd_export)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code else 0
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        return args.func(args)
    except (
        CLIError,
        TraceSyntaxError,
        TraceSemanticError,
        SpecError,
        ComparatorError,
        AncovaError,
        XMLDiffError,
        UnicodeDecodeError,
        OSError,
        ValueError,
    ) as exc:
        sys.stderr.write(f"provdelta: error: {exc}\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
