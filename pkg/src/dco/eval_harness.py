"""Corpus runner: k generations per task, unit-test verdicts under the sandbox
guards, categorized failure accounting, and deterministic report emission.
"""

from __future__ import annotations

import ast
import json
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

from .code_loader import FunctionRegistry
from .config import RuntimeConfig
from .directive_store import Directive, GenerationPolicy
from .errors import DirectivesParseError
from .failures import CATEGORIES
from .llm_client import Backend
from .orchestrator import Orchestrator
from .sandbox import invoke_with_timeout

CHECK_NAME = "check"


@dataclass(frozen=True)
class EvalTask:
    task_id: str
    prompt: str
    entry_point: str
    tests: str  # defines exactly one check(candidate) that raises on failure
    timeout_ms: int | None = None


@dataclass(frozen=True)
class SampleResult:
    task_id: str
    sample_index: int
    verdict: str  # "pass" or a failure category
    elapsed_ms: int
    source_hash: str | None  # present iff extraction succeeded


@dataclass(frozen=True)
class EvalReport:
    tasks: int
    samples: int
    pass_count: int
    pass_rate: float
    pass_rate_extractable: float
    category_counts: dict[str, int]
    per_sample: list[SampleResult]


def _count_check_defs(tests: str) -> int:
    tree = ast.parse(tests)
    return sum(
        1
        for node in tree.body
        if isinstance(node, (ast.FunctionDef, ast.AsyncFunctionDef)) and node.name == CHECK_NAME
    )


def load_corpus(path: str | Path) -> list[EvalTask]:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(str(path))
    tasks: list[EvalTask] = []
    seen: set[str] = set()
    for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
            task = EvalTask(
                task_id=obj["task_id"],
                prompt=obj["prompt"],
                entry_point=obj["entry_point"],
                tests=obj["tests"],
                timeout_ms=obj.get("timeout_ms"),
            )
        except (KeyError, ValueError, TypeError) as exc:
            raise DirectivesParseError(lineno, f"bad corpus line: {exc}") from exc
        if task.task_id in seen:
            raise DirectivesParseError(lineno, f"duplicate task_id {task.task_id!r}")
        if _count_check_defs(task.tests) != 1:
            raise DirectivesParseError(
                lineno, f"tests for {task.task_id!r} must define exactly one {CHECK_NAME}()"
            )
        seen.add(task.task_id)
        tasks.append(task)
    return tasks


def task_directive(task: EvalTask, config: RuntimeConfig) -> Directive:
    """The task's prompt acts as the written directive; generation is
    ephemeral so every sample is a fresh attempt."""
    return Directive(
        id=task.task_id,
        entry_point=task.entry_point,
        text=task.prompt,
        context_sources=(),
        policy=GenerationPolicy(
            mode="diverse",
            temperature=config.eval_temperature,
            cache="ephemeral",
            timeout_ms=task.timeout_ms or config.timeout_ms,
            import_policy="deny",
        ),
        version=1,
    )


def _build_check(tests: str):
    namespace: dict = {}
    exec(compile(tests, "<tests>", "exec"), namespace)
    return namespace[CHECK_NAME]


def run_sample(task: EvalTask, sample_index: int, backend: Backend,
               config: RuntimeConfig) -> SampleResult:
    # Fresh registry per sample: tasks sharing entry-point names must not
    # see each other's bindings under parallelism.
    registry = FunctionRegistry()
    orchestrator = Orchestrator(None, backend, registry, config)
    directive = task_directive(task, config)
    block = orchestrator.generate_block(directive, sample_index=sample_index)
    source_hash = block.source_hash or None
    if block.status != "ready":
        return SampleResult(
            task_id=task.task_id,
            sample_index=sample_index,
            verdict=block.failure.category,
            elapsed_ms=0,
            source_hash=source_hash,
        )
    candidate = registry.resolve(task.entry_point)
    check = _build_check(task.tests)
    timeout_ms = task.timeout_ms or config.timeout_ms
    outcome = invoke_with_timeout(check, [candidate], timeout_ms)
    if outcome.status == "ok":
        verdict = "pass"
    elif outcome.status == "timeout":
        verdict = "Timeout"
    elif outcome.error_message.startswith("AssertionError"):
        verdict = "TestFailure"
    else:
        verdict = "RuntimeError"
    return SampleResult(
        task_id=task.task_id,
        sample_index=sample_index,
        verdict=verdict,
        elapsed_ms=outcome.elapsed_ms,
        source_hash=source_hash,
    )


def run_task(task: EvalTask, k: int, backend: Backend, config: RuntimeConfig) -> list[SampleResult]:
    if k < 1:
        raise ValueError("k must be >= 1")
    return [run_sample(task, i, backend, config) for i in range(k)]


def aggregate(corpus_size: int, results: list[SampleResult]) -> EvalReport:
    """Order-independent: per_sample is sorted and counts are commutative."""
    ordered = sorted(results, key=lambda r: (r.task_id, r.sample_index))
    pass_count = sum(1 for r in ordered if r.verdict == "pass")
    category_counts: dict[str, int] = {}
    for r in ordered:
        if r.verdict != "pass":
            category_counts[r.verdict] = category_counts.get(r.verdict, 0) + 1
    samples = len(ordered)
    extractable = samples - category_counts.get("ExtractionFailure", 0)
    return EvalReport(
        tasks=corpus_size,
        samples=samples,
        pass_count=pass_count,
        pass_rate=pass_count / samples if samples else 0.0,
        pass_rate_extractable=pass_count / extractable if extractable > 0 else 0.0,
        category_counts=category_counts,
        per_sample=ordered,
    )


def run_corpus(corpus: list[EvalTask], k: int, backend: Backend, config: RuntimeConfig,
               parallelism: int = 1) -> EvalReport:
    if k < 1:
        raise ValueError("k must be >= 1")
    jobs = [(task, index) for task in corpus for index in range(k)]
    if parallelism <= 1:
        results = [run_sample(task, index, backend, config) for task, index in jobs]
    else:
        with ThreadPoolExecutor(max_workers=parallelism) as pool:
            results = list(pool.map(lambda job: run_sample(job[0], job[1], backend, config), jobs))
    return aggregate(len(corpus), results)


def report_to_json(report: EvalReport) -> dict:
    """Stable key order; volatile timings stay out of the report body so
    identical runs serialize byte-identically."""
    return {
        "tasks": report.tasks,
        "samples": report.samples,
        "pass_count": report.pass_count,
        "pass_rate": report.pass_rate,
        "pass_rate_extractable": report.pass_rate_extractable,
        "category_counts": {
            category: report.category_counts[category]
            for category in CATEGORIES
            if category in report.category_counts
        },
        "per_sample": [
            {
                "task_id": r.task_id,
                "sample_index": r.sample_index,
                "verdict": r.verdict,
                "source_hash": r.source_hash,
            }
            for r in report.per_sample
        ],
    }


def write_report(report: EvalReport, path: str | Path) -> None:
    body = json.dumps(report_to_json(report), indent=2) + "\n"
    Path(path).write_text(body, encoding="utf-8")


def read_report(path: str | Path) -> dict:
    return json.loads(Path(path).read_text(encoding="utf-8"))
