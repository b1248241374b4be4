"""Command-line front door.

``qhist run`` loads a scenario (built-in name or JSON document file), runs
the analysis and prints a report.  Exit codes are the only success/failure
channel: 0 when every requested check passes, 1 on a check failure, 2 on
an input error.  All computation lives in :mod:`qhist.analysis`; this
module only parses flags and renders.  ``qhist serve`` boots the HTTP
service exposing the same analysis.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .analysis import AnalysisOptions, analyze
from .errors import ParseError, QHistError, UnknownScenario
from .scenarios import build_builtin, builtin_names, compile_document
from .schemas import AnalysisReport, emit_report, parse_document

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_INPUT_ERROR = 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qhist",
        description="consistent-histories analysis of delayed-choice scenarios",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="analyze a scenario and report the results")
    source = run.add_mutually_exclusive_group(required=True)
    source.add_argument(
        "--builtin",
        metavar="NAME",
        help=f"built-in scenario ({', '.join(builtin_names())})",
    )
    source.add_argument("--file", metavar="PATH", help="scenario document (JSON)")
    run.add_argument(
        "--report",
        choices=("text", "json"),
        default="text",
        help="stdout format (default: text)",
    )
    run.add_argument(
        "--tol",
        type=float,
        default=1e-10,
        metavar="FLOAT",
        help="consistency tolerance (default: 1e-10)",
    )
    run.add_argument(
        "--out", metavar="PATH", help="also write the JSON report to this path"
    )
    run.add_argument(
        "--show-zero-branches",
        action="store_true",
        help="include branches below the display threshold (1e-12)",
    )

    serve = sub.add_parser("serve", help="start the HTTP analysis service")
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=8000)
    return parser


def _load_scenario(args):
    if args.builtin:
        return build_builtin(args.builtin)
    path = Path(args.file)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseError([f"cannot read {path}: {exc}"]) from None
    return compile_document(parse_document(text))


def render_text(report: AnalysisReport) -> str:
    """Human-readable report."""
    lines = [f"scenario: {report.scenario} (dimension {report.dimension}, tol {report.tolerance:.1e})"]
    for note in report.notes:
        lines.append(f"note: {note}")
    for family in report.families:
        verdict = "CONSISTENT" if family.consistent else "INCONSISTENT"
        lines.append(
            f"\nfamily {family.name}: {verdict} "
            f"(max off-diagonal {family.max_offdiagonal:.3e})"
        )
        if family.branches is None:
            lines.append("  probabilities refused: family fails consistency")
        else:
            for branch in family.branches:
                lines.append(
                    f"  Pr[{' -> '.join(branch.choices)}] = {branch.probability:.10g}"
                )
        for cond in family.conditionals:
            given = ", ".join(f"t{t.time}={t.alternative}" for t in cond.given)
            target = ", ".join(f"t{t.time}={t.alternative}" for t in cond.target)
            lines.append(f"  Pr[{target} | {given}] = {cond.probability:.10g}")
    for pair in report.pairs:
        verdict = "compatible" if pair.compatible else "INCOMPATIBLE"
        lines.append(f"\npair {pair.family_a} / {pair.family_b}: {verdict}")
        for w in pair.commutation_witnesses[:3]:
            lines.append(
                f"  non-commuting at t{w.time}: {w.alternative_a!r} vs "
                f"{w.alternative_b!r} (commutator {w.commutator_norm:.3f})"
            )
        if len(pair.commutation_witnesses) > 3:
            lines.append(
                f"  ... {len(pair.commutation_witnesses) - 3} more non-commuting pairs"
            )
        if pair.refinement_consistent is not None:
            lines.append(
                f"  common refinement consistent: {pair.refinement_consistent} "
                f"(max off-diagonal {pair.refinement_max_offdiagonal:.3e})"
            )
    if report.checks:
        lines.append("\nchecks:")
        for check in report.checks:
            mark = "PASS" if check.passed else "FAIL"
            suffix = f"  [{check.detail}]" if check.detail else ""
            lines.append(f"  [{mark}] {check.name} ({check.kind}){suffix}")
        passed = sum(1 for c in report.checks if c.passed)
        lines.append(f"\nsummary: {passed}/{len(report.checks)} checks passed")
    return "\n".join(lines) + "\n"


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)

    if args.command == "serve":
        import uvicorn

        from .service import app

        uvicorn.run(app, host=args.host, port=args.port)
        return EXIT_OK

    try:
        scenario = _load_scenario(args)
    except ParseError as exc:
        print("input error:", file=sys.stderr)
        for diagnostic in exc.diagnostics:
            print(f"  {diagnostic}", file=sys.stderr)
        return EXIT_INPUT_ERROR
    except (UnknownScenario, QHistError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT_ERROR

    options = AnalysisOptions(
        tolerance=args.tol, show_zero_branches=args.show_zero_branches
    )
    report = analyze(scenario, options)

    if args.report == "json":
        sys.stdout.write(emit_report(report) + "\n")
    else:
        sys.stdout.write(render_text(report))
    if args.out:
        Path(args.out).write_text(emit_report(report) + "\n", encoding="utf-8")
    return EXIT_OK if report.all_passed else EXIT_CHECK_FAILED


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
