"""The plancheck command line tool.

Exit codes: 0 success (spec holds / plan valid), 1 counterexample or invalid
plan, 2 unknown (parse failure or bound exhausted), 3 usage or I/O error,
4 provider error.  Stdout stays machine-readable (and only populated) under
--json; human diagnostics go to stderr.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from . import __version__
from . import bmc
from . import harness
from . import kripke as kr
from . import ltl
from . import plans
from . import smv
from . import translate as tr

EXIT_OK = 0
EXIT_COUNTEREXAMPLE = 1
EXIT_UNKNOWN = 2
EXIT_USAGE = 3
EXIT_PROVIDER = 4


class _ArgumentParser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _read(path: str) -> str:
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def _write(path: str, text: str) -> None:
    if path == "-":
        sys.stdout.write(text)
        return
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)


def _print_json(doc) -> None:
    print(json.dumps(doc, indent=2))


def _diag(message: str) -> None:
    print(message, file=sys.stderr)


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------


def _cmd_parse(args) -> int:
    try:
        model = smv.parse_model(_read(args.file))
    except smv.ParseError as e:
        if args.json:
            _print_json({"ok": False, "error": str(e)})
        _diag(f"{args.file}:{e}")
        return EXIT_UNKNOWN
    diags = smv.check_semantics(model)
    errors = [d for d in diags if d.severity is smv.Severity.ERROR]
    warnings = [d for d in diags if d.severity is smv.Severity.WARNING]
    for d in warnings:
        _diag(f"{args.file}: warning: {d}")
    if errors:
        for d in errors:
            _diag(f"{args.file}: error: {d}")
        if args.json:
            _print_json({"ok": False, "error": str(errors[0])})
        return EXIT_UNKNOWN
    text = smv.pretty_print(model)
    if args.json:
        _print_json({"ok": True, "model": text, "warnings": [str(d) for d in warnings]})
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _load_checked_model(path: str):
    model = smv.parse_model(_read(path))
    k = kr.compile(model)
    return model, k


def _cmd_check(args) -> int:
    try:
        model, k = _load_checked_model(args.model)
    except smv.ParseError as e:
        _diag(f"{args.model}:{e}")
        return EXIT_UNKNOWN
    except kr.CompileError as e:
        _diag(f"{args.model}: {e}")
        return EXIT_UNKNOWN
    if not model.ltlspecs:
        _diag(f"{args.model}: model has no LTLSPEC to check")
        return EXIT_USAGE
    if harness.is_vacuous(k):
        _diag("warning: model has no initial states; specs hold vacuously")

    bound = args.bound
    if bound is None:
        bound = bmc.completeness_bound(k)
    if bound is None:
        bound = harness.DEFAULT_MAX_BOUND

    results = []
    worst = EXIT_OK
    first_trace = None
    for i, spec in enumerate(model.ltlspecs):
        outcome = bmc.check_spec(k, spec, bound, incremental=not args.no_incremental)
        tag = f"LTLSPEC {i + 1}" if len(model.ltlspecs) > 1 else "LTLSPEC"
        if isinstance(outcome, bmc.Holds):
            _diag(f"{tag} holds (complete at bound {outcome.bound_proved})")
            results.append({"spec": ltl.format_ltl(spec), "outcome": "holds", "bound": outcome.bound_proved})
        elif isinstance(outcome, bmc.CounterexampleFound):
            _diag(f"{tag} violated at bound {outcome.at_bound}")
            doc = {
                "spec": ltl.format_ltl(spec),
                "outcome": "counterexample",
                "bound": outcome.at_bound,
                "trace": json.loads(kr.trace_to_json(outcome.trace)),
            }
            results.append(doc)
            if first_trace is None:
                first_trace = outcome.trace
            worst = EXIT_COUNTEREXAMPLE
        else:
            _diag(f"{tag} undetermined up to bound {outcome.max_bound}")
            results.append({"spec": ltl.format_ltl(spec), "outcome": "exhausted", "bound": outcome.max_bound})
            if worst == EXIT_OK:
                worst = EXIT_UNKNOWN
    if args.trace_out and first_trace is not None:
        _write(args.trace_out, kr.trace_to_json(first_trace))
        _diag(f"counterexample written to {args.trace_out}")
    if args.json:
        _print_json({"specs": results})
    return worst


def _cmd_encode_plan(args) -> int:
    problem = plans.load_problem(_read(args.infile))
    model, _ = plans.encode_plan(problem)
    _write(args.out, smv.pretty_print(model))
    if args.out != "-":
        _diag(f"model written to {args.out}")
    return EXIT_OK


def _cmd_simulate(args) -> int:
    problem = plans.load_problem(_read(args.infile))
    verdict = plans.simulate_plan(problem)
    if args.json:
        evidence = verdict.evidence
        if isinstance(evidence, kr.Trace):
            evidence = json.loads(kr.trace_to_json(evidence))
        _print_json({"verdict": verdict.kind, "evidence": evidence})
    if verdict.kind == plans.VALID:
        _diag("plan valid")
        return EXIT_OK
    if isinstance(verdict.evidence, int):
        name = problem.plan[verdict.evidence]
        _diag(f"plan invalid: action {verdict.evidence} ({name}) inapplicable")
    else:
        _diag("plan invalid: goal not reached")
    return EXIT_COUNTEREXAMPLE


def _cmd_translate(args) -> int:
    cfg = tr.load_provider_config(_read(args.provider), base_dir=os.path.dirname(os.path.abspath(args.provider)))
    nl = _read(args.infile)
    case_id = args.case_id
    if case_id is None:
        base = os.path.basename(args.infile)
        case_id = os.path.splitext(base)[0]
    result = tr.translate(nl, cfg, case_id=case_id)
    if args.json:
        _print_json(
            {
                "ok": result.failure is None,
                "model_text": result.model_text,
                "spec_text": result.spec_text,
                "error": None if result.failure is None else str(result.failure),
            }
        )
    if result.failure is not None:
        _diag(f"translation failed: {result.failure}")
        return EXIT_UNKNOWN
    text = result.model_text + result.spec_text
    if args.out:
        _write(args.out, text)
        _diag(f"model written to {args.out}")
    elif not args.json:
        sys.stdout.write(text)
    return EXIT_OK


_FORMATS = {".md": "markdown", ".markdown": "markdown", ".csv": "csv", ".json": "json"}


def _cmd_bench(args) -> int:
    problems = plans.load_dataset(_read(args.dataset))
    provider = None
    if args.provider:
        provider = tr.load_provider_config(
            _read(args.provider), base_dir=os.path.dirname(os.path.abspath(args.provider))
        )
    cfg = harness.RunConfig(
        mode=args.mode,
        policy=args.policy,
        max_bound=args.bound,
        jobs=args.jobs,
        provider=provider,
    )
    cfg.validate()
    ext = os.path.splitext(args.out)[1].lower()
    fmt = _FORMATS.get(ext)
    if fmt is None:
        raise ValueError(f"cannot infer report format from {args.out!r} (use .md, .csv or .json)")

    results = harness.run_dataset(problems, cfg)
    summary = harness.summarize_run(results, cfg.mode, cfg.policy)
    _write(args.out, harness.emit_report(summary, fmt, include_timing=not args.no_timing))
    written = [args.out]
    if not args.no_figures:
        from . import figures

        base = os.path.splitext(args.out)[0]
        written += figures.render_figures(summary, base)
    if args.json:
        _print_json(json.loads(harness.emit_report(summary, "json", include_timing=not args.no_timing)))
    c = summary.report.counts
    _diag(
        f"{c.scored + len(summary.errored)} cases: "
        f"tp={c.tp} fp={c.fp} tn={c.tn} fn={c.fn} unknown={c.unknown} errored={len(summary.errored)}"
    )
    _diag("wrote " + ", ".join(written))
    return EXIT_OK


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = _ArgumentParser(prog="plancheck", description="Plan verification toolkit")
    parser.add_argument("--version", action="version", version=f"plancheck {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("parse", help="parse a model and print its canonical form")
    p.add_argument("file")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=_cmd_parse)

    p = sub.add_parser("check", help="check a model's LTLSPEC blocks")
    p.add_argument("model")
    p.add_argument("--bound", type=int, default=None, help="maximum bound (default: completeness bound)")
    p.add_argument("--trace-out", default=None, help="write the first counterexample trace as JSON")
    p.add_argument("--no-incremental", action="store_true", help="re-encode each bound from scratch")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=_cmd_check)

    p = sub.add_parser("encode-plan", help="translate a plan problem to a model")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", required=True, help="output path, or - for stdout")
    p.set_defaults(func=_cmd_encode_plan)

    p = sub.add_parser("simulate", help="validate a plan by direct simulation")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("translate", help="translate natural language via a provider")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--provider", required=True, help="provider config JSON")
    p.add_argument("--case-id", default=None, help="transcript key (default: input basename)")
    p.add_argument("--out", default=None)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=_cmd_translate)

    p = sub.add_parser("bench", help="run a dataset and write a report")
    p.add_argument("--dataset", required=True)
    p.add_argument("--mode", choices=harness.MODES, default="formal_direct")
    p.add_argument("--policy", choices=harness.POLICIES, default="exclude")
    p.add_argument("--provider", default=None)
    p.add_argument("--out", required=True, help="report path; format from extension")
    p.add_argument("--bound", type=int, default=None)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--no-figures", action="store_true")
    p.add_argument("--no-timing", action="store_true", help="omit wall-clock times from the report")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=_cmd_bench)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    try:
        return args.func(args)
    except tr.ProviderError as e:
        _diag(f"provider error: {e}")
        return EXIT_PROVIDER
    except (plans.SchemaError, tr.ConfigError, ValueError, OSError) as e:
        _diag(f"error: {e}")
        return EXIT_USAGE
    except smv.ParseError as e:
        _diag(f"error: {e}")
        return EXIT_UNKNOWN
    except kr.CompileError as e:
        _diag(f"error: {e}")
        return EXIT_UNKNOWN


if __name__ == "__main__":
    sys.exit(main())
