"""Command line interface.

Exit codes: 0 success, 1 domain failure (failed block, failed invocation,
unknown directive), 2 usage error. An eval run that completes and writes its
report exits 0 regardless of how many samples failed; failures there are the
measurement, not an error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import eval_harness
from .config import RuntimeConfig, ServiceConfig
from .directive_store import load_directives, write_directives
from .errors import DcoError
from .gateway import ServiceState, make_backend, serve

EXIT_OK = 0
EXIT_DOMAIN = 1
EXIT_USAGE = 2


def _add_service_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--backend", choices=["mock", "replay", "http"], default="mock")
    parser.add_argument("--directives", type=Path, default=None,
                        help="directives file (default: bundled editor set)")
    parser.add_argument("--fixtures", type=Path, default=None,
                        help="replay fixture file (JSONL)")
    parser.add_argument("--mock-scripts", type=Path, default=None,
                        help="mock reply scripts (default: bundled editor scripts)")
    parser.add_argument("--blocks-path", type=Path, default=Path("blocks.jsonl"))
    parser.add_argument("--std-modules", type=Path, default=None,
                        help="standard-modules list for the deny import policy")


def _service_config(args, port: int | None = None) -> ServiceConfig:
    runtime = RuntimeConfig.from_env(std_modules_path=args.std_modules)
    return ServiceConfig(
        port=port if port is not None else 8350,
        backend=args.backend,
        directives_path=args.directives,
        fixtures_path=args.fixtures,
        mock_scripts_path=args.mock_scripts,
        blocks_path=args.blocks_path,
        runtime=runtime,
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dco",
        description="Generate, register, and invoke code blocks from written directives.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_generate = sub.add_parser("generate", help="run the generation pipeline for a directive")
    p_generate.add_argument("directive_id")
    _add_service_flags(p_generate)

    p_invoke = sub.add_parser("invoke", help="generate (or reuse) and invoke a directive")
    p_invoke.add_argument("directive_id")
    p_invoke.add_argument("--args", default="[]", help="JSON list of arguments")
    _add_service_flags(p_invoke)

    p_update = sub.add_parser("update", help="update a directive's text (mirrors PUT)")
    p_update.add_argument("directive_id")
    p_update.add_argument("--text", required=True)
    _add_service_flags(p_update)

    p_purge = sub.add_parser("purge", help="delete persisted block records")
    p_purge.add_argument("--scope", choices=["all", "failed_only", "older_than"], default="all")
    p_purge.add_argument("--older-than-ms", type=int, default=None)
    _add_service_flags(p_purge)

    p_serve = sub.add_parser("serve", help="run the HTTP service")
    p_serve.add_argument("--port", type=int, default=8350)
    _add_service_flags(p_serve)

    p_eval = sub.add_parser("eval", help="run a corpus evaluation")
    p_eval.add_argument("--corpus", type=Path, required=True)
    p_eval.add_argument("--k", type=int, default=1)
    p_eval.add_argument("--report", type=Path, required=True)
    p_eval.add_argument("--parallelism", type=int, default=1)
    p_eval.add_argument("--contract", choices=["fenced", "json_envelope"],
                        default="json_envelope")
    _add_service_flags(p_eval)

    return parser


def _cmd_generate(args) -> int:
    state = ServiceState(_service_config(args))
    directive = state.store.get(args.directive_id)
    block = state.orchestrator.generate_block(directive)
    print(json.dumps(block.to_json(), indent=2))
    return EXIT_OK if block.status == "ready" else EXIT_DOMAIN


def _cmd_invoke(args) -> int:
    try:
        call_args = json.loads(args.args)
    except ValueError:
        print("--args must be a JSON list", file=sys.stderr)
        return EXIT_USAGE
    if not isinstance(call_args, list):
        print("--args must be a JSON list", file=sys.stderr)
        return EXIT_USAGE
    state = ServiceState(_service_config(args))
    result = state.invoke(args.directive_id, call_args)
    print(json.dumps({
        "outcome": result.outcome.to_json() if result.outcome else None,
        "block": result.block.to_json(),
        "effects": state.editor.snapshot(),
    }, indent=2))
    return EXIT_OK if result.ok else EXIT_DOMAIN


def _cmd_update(args) -> int:
    directives_path = args.directives
    if directives_path is None:
        print("update requires --directives (a writable directives file)", file=sys.stderr)
        return EXIT_USAGE
    store = load_directives(directives_path)
    directive = store.update_text(args.directive_id, args.text)
    write_directives(store, directives_path)
    print(json.dumps({
        "id": directive.id,
        "version": directive.version,
        "text": directive.text,
    }, indent=2))
    return EXIT_OK


def _cmd_purge(args) -> int:
    if args.scope == "older_than" and args.older_than_ms is None:
        print("--older-than-ms is required with --scope older_than", file=sys.stderr)
        return EXIT_USAGE
    state = ServiceState(_service_config(args))
    purged = state.orchestrator.purge_blocks(args.scope, args.older_than_ms)
    print(json.dumps({"purged": purged}))
    return EXIT_OK


def _cmd_serve(args) -> int:
    serve(_service_config(args, port=args.port))
    return EXIT_OK


def _cmd_eval(args) -> int:
    if args.backend == "replay" and args.fixtures is None:
        print("eval with --backend replay requires --fixtures", file=sys.stderr)
        return EXIT_USAGE
    runtime = RuntimeConfig.from_env(
        response_contract=args.contract, std_modules_path=args.std_modules
    )
    corpus = eval_harness.load_corpus(args.corpus)
    backend = make_backend(_service_config(args))
    report = eval_harness.run_corpus(corpus, args.k, backend, runtime,
                                     parallelism=args.parallelism)
    eval_harness.write_report(report, args.report)
    summary = {
        "tasks": report.tasks,
        "samples": report.samples,
        "pass_count": report.pass_count,
        "pass_rate": report.pass_rate,
        "report": str(args.report),
    }
    print(json.dumps(summary, indent=2))
    return EXIT_OK


_COMMANDS = {
    "generate": _cmd_generate,
    "invoke": _cmd_invoke,
    "update": _cmd_update,
    "purge": _cmd_purge,
    "serve": _cmd_serve,
    "eval": _cmd_eval,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    try:
        return _COMMANDS[args.command](args)
    except FileNotFoundError as exc:
        print(f"file not found: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except DcoError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_DOMAIN


if __name__ == "__main__":
    sys.exit(main())
