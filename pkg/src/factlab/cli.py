"""Command-line interface: check, llm-eval, checker-eval, solvers, serve.

Machine-readable JSON goes to stdout; logs and the optional human-readable
tables go to stderr. Exit codes: 0 success, 1 evaluation/pipeline failure,
2 usage or schema errors (argparse's own usage failures also exit 2).
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import time
from pathlib import Path

from . import envvars
from .checker_eval import CheckerMetrics, compute_metrics, ingest_verdicts, load_factbench
from .errors import (
    ChainMismatchError,
    ConfigParseError,
    CsvFormatError,
    DuplicateRowError,
    FactLabError,
    ManifestCountError,
    ManifestSchemaError,
    RegistrationError,
    UnknownClaimError,
    UnknownQuestionError,
    UnknownSolverError,
    VerdictFormatError,
)
from .llm_eval import LLMEvaluator, LLMReport, load_manifest
from .pipeline import DEFAULT_REGISTRY, Stage, load_pipeline_config_file, run_pipeline
from .response import ResponseReport, build_report, evaluate_response
from .solvers.backends import MockBackend, OpenAIChatBackend
from .state import FactState

log = logging.getLogger(__name__)

USAGE_ERRORS = (
    ConfigParseError,
    UnknownSolverError,
    ChainMismatchError,
    RegistrationError,
    ManifestSchemaError,
    ManifestCountError,
    CsvFormatError,
    VerdictFormatError,
    DuplicateRowError,
    UnknownQuestionError,
    UnknownClaimError,
    FileNotFoundError,
)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="factlab",
        description="Fact-checking pipelines and factuality evaluation.",
    )
    subparsers = parser.add_subparsers(dest="command", required=True)

    check = subparsers.add_parser("check", help="fact-check a document")
    source = check.add_mutually_exclusive_group(required=True)
    source.add_argument("--text", help="document text to check")
    source.add_argument("--file", help="path to a file with the document text")
    check.add_argument("--config", required=True, help="pipeline config path")
    check.add_argument(
        "--start-step",
        choices=[stage.value for stage in Stage],
        help="start at this stage; earlier values are read from stdin JSON",
    )
    check.add_argument("--pretty", action="store_true", help="table on stderr")

    llm = subparsers.add_parser("llm-eval", help="score a model's responses")
    llm.add_argument("--model", required=True, help="evaluated model name")
    llm.add_argument("--input", required=True, help="responses CSV path")
    llm.add_argument("--manifest", required=True, help="question manifest path")
    llm.add_argument("--out", help="also write the report JSON here")
    llm.add_argument("--checker-config", help="pipeline config for free-form subsets")
    llm.add_argument(
        "--judge",
        default="none",
        help="fresh-question judge: none, mock:<responses.json>, openai[:model]",
    )
    llm.add_argument("--jobs", type=int, default=1, help="parallel row evaluations")
    llm.add_argument(
        "--no-timing",
        action="store_true",
        help="omit wall-clock measurement so report bytes are reproducible",
    )
    llm.add_argument("--pretty", action="store_true", help="table on stderr")

    checker = subparsers.add_parser("checker-eval", help="score a fact-checker")
    checker.add_argument("--input", required=True, help="verdicts CSV path")
    checker.add_argument("--gold", required=True, help="gold manifest path")
    checker.add_argument("--out", help="also write the metrics JSON here")
    checker.add_argument("--pretty", action="store_true", help="table on stderr")

    solvers = subparsers.add_parser("solvers", help="list registered solvers")
    solvers.add_argument("--pretty", action="store_true", help="table on stderr")

    serve = subparsers.add_parser("serve", help="run the HTTP service")
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=None)
    serve.add_argument("--data-dir", default=None)
    serve.add_argument("--configs-dir", help="directory of pipeline config YAMLs")
    serve.add_argument("--factqa", help="installed factqa manifest path")
    serve.add_argument("--factbench", help="installed factbench manifest path")
    serve.add_argument("--static-dir", help="dashboard static assets directory")
    serve.add_argument("--checker-config", help="config name for llm-eval free-form")
    serve.add_argument("--workers", type=int, default=2, help="job workers")

    return parser


def _emit(text: str, out_path: str | None) -> None:
    payload = text + "\n"
    sys.stdout.write(payload)
    if out_path:
        Path(out_path).write_text(payload, encoding="utf-8")


def _judge_from_spec(spec: str):
    if spec == "none":
        return None
    if spec.startswith("mock:"):
        return MockBackend.from_json_file(spec.split(":", 1)[1])
    if spec == "openai":
        return OpenAIChatBackend()
    if spec.startswith("openai:"):
        return OpenAIChatBackend(model=spec.split(":", 1)[1])
    raise ConfigParseError(f"unknown judge spec {spec!r}")


def _read_stdin_entries() -> dict:
    raw = sys.stdin.read().strip()
    if not raw:
        return {}
    data = json.loads(raw)
    if isinstance(data, list):
        data = {"claims": data}
    if not isinstance(data, dict):
        raise ConfigParseError("stdin must hold a JSON object or claim list")
    return data


def cmd_check(args: argparse.Namespace) -> int:
    document = args.text if args.text is not None else Path(args.file).read_text(
        encoding="utf-8"
    )
    config = load_pipeline_config_file(args.config)
    if args.start_step:
        start = next(
            (
                index
                for index, spec in enumerate(config.solvers)
                if spec.stage.value == args.start_step
            ),
            None,
        )
        if start is None:
            raise ConfigParseError(
                f"config has no {args.start_step} stage to start from"
            )
        config = config.with_start(start)
        entries = _read_stdin_entries()
        entries["document"] = document
        state = FactState.from_dict(entries)
        final = run_pipeline(state, config)
        report = build_report(document, final, config)
    else:
        report = evaluate_response(document, config)
    _emit(report.to_json(), None)
    if args.pretty:
        _print_check_table(report)
    return 0


def _print_check_table(report: ResponseReport) -> None:
    credibility = (
        f"{report.credibility:.0%}" if report.credibility is not None else "n/a"
    )
    print(
        f"overall: {report.overall.value}  credibility: {credibility}",
        file=sys.stderr,
    )
    for claim_report in report.claims:
        print(
            f"  {claim_report.claim.id}: {claim_report.verdict.label.value:7s} "
            f"({claim_report.evidence_count} evidence)  "
            f"{claim_report.claim.text[:60]}",
            file=sys.stderr,
        )


def cmd_llm_eval(args: argparse.Namespace) -> int:
    manifest = load_manifest(args.manifest)
    checker_config = (
        load_pipeline_config_file(args.checker_config)
        if args.checker_config
        else None
    )
    evaluator = LLMEvaluator(
        manifest,
        checker_config=checker_config,
        judge=_judge_from_spec(args.judge),
        max_workers=args.jobs,
        timer=None if args.no_timing else time.perf_counter,
    )
    report = evaluator.evaluate(args.model, args.input)
    _emit(report.to_json(), args.out)
    if args.pretty:
        _print_llm_table(report)
    return 0


def _print_llm_table(report: LLMReport) -> None:
    print(f"model: {report.model_name}", file=sys.stderr)
    for subset, block in report.subsets.items():
        if block.get("n_evaluated"):
            accuracy = block.get("accuracy")
            shown = f"{accuracy:.3f}" if accuracy is not None else "n/a"
            print(
                f"  {subset:16s} n={block['n_evaluated']:<5d} accuracy={shown}",
                file=sys.stderr,
            )
        else:
            print(f"  {subset:16s} (not evaluated)", file=sys.stderr)
    totals = report.totals
    print(
        f"  evaluated={totals['n_evaluated']} cost=${totals['cost_usd']:.4f} "
        f"time={totals['time_seconds']:.2f}s",
        file=sys.stderr,
    )


def cmd_checker_eval(args: argparse.Namespace) -> int:
    gold = load_factbench(args.gold)
    ingest = ingest_verdicts(args.input, gold)
    metrics = compute_metrics(ingest.rows)
    _emit(metrics.to_json(), args.out)
    if args.pretty:
        _print_checker_table(metrics)
    return 0


def _print_checker_table(metrics: CheckerMetrics) -> None:
    print(
        f"n={metrics.n}  accuracy={metrics.accuracy:.4f}  "
        f"macro_f1={metrics.macro_f1:.4f}",
        file=sys.stderr,
    )
    for label, block in (("true", metrics.true_class), ("false", metrics.false_class)):
        print(
            f"  {label:5s} P={block.precision:.4f} R={block.recall:.4f} "
            f"F1={block.f1:.4f}",
            file=sys.stderr,
        )
    print(
        f"  time={metrics.total_time_seconds:.2f}s cost=${metrics.total_cost_usd:.4f}",
        file=sys.stderr,
    )


def cmd_solvers(args: argparse.Namespace) -> int:
    listing = DEFAULT_REGISTRY.by_stage()
    _emit(json.dumps(listing, sort_keys=True, indent=2), None)
    if args.pretty:
        for stage, names in listing.items():
            print(f"{stage}: {', '.join(names) or '(none)'}", file=sys.stderr)
    return 0


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .service import ServiceSettings, create_app, load_configs_dir

    port = args.port or int(os.environ.get(envvars.PORT, "8000"))
    data_dir = Path(
        args.data_dir or os.environ.get(envvars.DATA_DIR, "factlab-data")
    )
    configs = load_configs_dir(args.configs_dir) if args.configs_dir else {}
    datasets = {}
    if args.factqa:
        datasets["factqa"] = Path(args.factqa)
    if args.factbench:
        datasets["factbench"] = Path(args.factbench)
    settings = ServiceSettings(
        data_dir=data_dir,
        configs=configs,
        datasets=datasets,
        checker_config_name=args.checker_config,
        workers=args.workers,
        static_dir=Path(args.static_dir) if args.static_dir else None,
    )
    app = create_app(settings)
    uvicorn.run(app, host=args.host, port=port)
    return 0


COMMANDS = {
    "check": cmd_check,
    "llm-eval": cmd_llm_eval,
    "checker-eval": cmd_checker_eval,
    "solvers": cmd_solvers,
    "serve": cmd_serve,
}


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(
        stream=sys.stderr,
        level=os.environ.get("FACTLAB_LOG_LEVEL", "WARNING"),
        format="%(levelname)s %(name)s: %(message)s",
    )
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except USAGE_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except FactLabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except json.JSONDecodeError as exc:
        print(f"error: invalid JSON input: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
