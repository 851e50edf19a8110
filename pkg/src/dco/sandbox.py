"""Guards around generated code: import-policy enforcement before compilation
and wall-clock-bounded invocation in a killable worker process.

The host interpreter cannot preempt a running thread, so every guarded call
runs in a forked child the host can terminate. Arguments reach the child by
memory inheritance; the result (and any host-object state) comes back over a
pipe as JSON, which restricts return values to null/bool/number/string/list/
string-keyed-map. A non-marshalable return value is reported as a
runtime_error rather than silently coerced.

Host objects passed as arguments may opt into state round-tripping by
implementing `__sandbox_state__()` (JSON-kind snapshot) and
`__sandbox_apply__(state)`; the snapshot taken after an `ok` call is applied
back in the host. Timed-out calls apply nothing: a killed worker leaves no
observable effects.
"""

from __future__ import annotations

import json
import multiprocessing
import os
import threading
import time
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from .directive_store import GenerationPolicy
from .failures import FailureRecord

DEFAULT_WORKER_CAP = 4

_worker_cap_lock = threading.Lock()
_worker_slots = threading.BoundedSemaphore(DEFAULT_WORKER_CAP)

# Process creation is serialized: forking from several threads at once is the
# risky part, not the concurrent waits afterwards.
_fork_lock = threading.Lock()


def set_worker_cap(cap: int) -> None:
    global _worker_slots
    if cap < 1:
        raise ValueError("worker cap must be >= 1")
    with _worker_cap_lock:
        _worker_slots = threading.BoundedSemaphore(cap)


# ---------------------------------------------------------------------------
# Import scanning and policy
# ---------------------------------------------------------------------------

_std_modules_cache: dict[str, frozenset[str]] = {}


def load_std_modules(path: str | Path | None = None) -> frozenset[str]:
    """Standard-module names implicitly allowed under `deny`. Shipped as an
    editable one-name-per-line file; `#` starts a comment."""
    cache_key = str(path) if path is not None else ""
    cached = _std_modules_cache.get(cache_key)
    if cached is not None:
        return cached
    if path is None:
        text = resources.files("dco.data").joinpath("std_modules.txt").read_text("utf-8")
    else:
        text = Path(path).read_text(encoding="utf-8")
    names = set()
    for line in text.splitlines():
        name = line.split("#", 1)[0].strip()
        if name:
            names.add(name)
    result = frozenset(names)
    _std_modules_cache[cache_key] = result
    return result


@dataclass(frozen=True)
class ImportScanResult:
    imports: tuple[str, ...]
    violations: tuple[str, ...]
    # Line numbers (0-based) of lines importing each violating module.
    violating_lines: tuple[int, ...] = ()


def _line_imports(line: str) -> list[str]:
    """Root module names imported by one line, if its first token is an
    import keyword. Purely lexical, as the guard runs before compilation."""
    tokens = line.split()
    if not tokens:
        return []
    if tokens[0] == "import":
        rest = line.split(None, 1)[1] if len(tokens) > 1 else ""
        names = []
        for clause in rest.split(","):
            clause = clause.strip()
            if not clause:
                continue
            names.append(clause.split()[0].split(".")[0])
        return names
    if tokens[0] == "from" and len(tokens) >= 2:
        module = tokens[1]
        if module.startswith("."):
            return []  # relative: resolves inside the block itself
        return [module.split(".")[0]]
    return []


def scan_imports(source: str, allowed: frozenset[str] | set[str] = frozenset()) -> ImportScanResult:
    """Every module imported at any nesting depth, with the subset not in
    `allowed` flagged (both in source order, first occurrence)."""
    imports: list[str] = []
    violations: list[str] = []
    violating_lines: list[int] = []
    for lineno, line in enumerate(source.split("\n")):
        names = _line_imports(line)
        bad_line = False
        for name in names:
            if name not in imports:
                imports.append(name)
                if name not in allowed:
                    violations.append(name)
            if name not in allowed:
                bad_line = True
        if bad_line:
            violating_lines.append(lineno)
    return ImportScanResult(tuple(imports), tuple(violations), tuple(violating_lines))


def apply_policy(
    source: str,
    policy: GenerationPolicy,
    std_modules: frozenset[str] | None = None,
) -> str | FailureRecord:
    """deny: fail on any violation; strip: delete violating import lines;
    allow: identity. Failures are returned, never raised."""
    if policy.import_policy == "allow":
        return source
    if std_modules is None:
        std_modules = load_std_modules()
    allowed = std_modules | set(policy.allowlist)
    scan = scan_imports(source, allowed)
    if not scan.violations:
        return source
    if policy.import_policy == "deny":
        return FailureRecord(
            category="DisallowedImport",
            detail="disallowed imports: " + ", ".join(scan.violations),
            stage="guard",
        )
    # strip: drop whole violating lines, leaving every other line untouched
    bad = set(scan.violating_lines)
    kept = [line for i, line in enumerate(source.split("\n")) if i not in bad]
    return "\n".join(kept)


# ---------------------------------------------------------------------------
# Guarded invocation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class InvocationOutcome:
    status: str  # ok | timeout | runtime_error
    value: object = None
    error_message: str = ""
    elapsed_ms: int = 0

    def to_json(self) -> dict:
        return {
            "status": self.status,
            "value": self.value,
            "error_message": self.error_message,
            "elapsed_ms": self.elapsed_ms,
        }


def _worker_main(conn, handle, args) -> None:
    try:
        value = handle(*args)
        states = [
            [i, arg.__sandbox_state__()]
            for i, arg in enumerate(args)
            if hasattr(arg, "__sandbox_state__")
        ]
        try:
            body = json.dumps({"status": "ok", "value": value, "host_states": states})
        except (TypeError, ValueError):
            body = json.dumps({
                "status": "error",
                "error": f"return value is not JSON-marshalable: {type(value).__name__}",
            })
        conn.send_bytes(body.encode("utf-8"))
    except BaseException as exc:  # noqa: BLE001 - everything becomes an outcome
        try:
            message = f"{type(exc).__name__}: {exc}"
            conn.send_bytes(json.dumps({"status": "error", "error": message}).encode("utf-8"))
        except Exception:
            pass
    finally:
        conn.close()
        os._exit(0)  # skip inherited atexit/flush work


def invoke_with_timeout(handle, args, timeout_ms: int) -> InvocationOutcome:
    """Call `handle(*args)` in a worker the host can kill.

    Never raises: the outcome is ok, timeout (worker terminated, elapsed_ms >=
    timeout_ms), or runtime_error with the captured message.
    """
    if timeout_ms < 1:
        raise ValueError("timeout_ms must be >= 1")
    ctx = multiprocessing.get_context("fork")
    args = list(args)
    with _worker_slots:
        parent_conn, child_conn = ctx.Pipe(duplex=False)
        proc = ctx.Process(target=_worker_main, args=(child_conn, handle, args), daemon=True)
        start = time.perf_counter()
        with _fork_lock:
            proc.start()
        child_conn.close()
        deadline = start + timeout_ms / 1000.0
        payload = None
        timed_out = False
        while True:
            remaining = deadline - time.perf_counter()
            if remaining <= 0:
                timed_out = proc.is_alive()
                break
            try:
                if parent_conn.poll(min(remaining, 0.02)):
                    payload = parent_conn.recv_bytes()
                    break
            except (EOFError, OSError):
                break  # child closed the pipe without a payload
            if not proc.is_alive():
                try:
                    if parent_conn.poll(0):  # died right after sending
                        payload = parent_conn.recv_bytes()
                except (EOFError, OSError):
                    pass
                break

        if payload is None and timed_out:
            proc.kill()
            proc.join()
            parent_conn.close()
            elapsed_ms = int((time.perf_counter() - start) * 1000)
            return InvocationOutcome(status="timeout", elapsed_ms=max(elapsed_ms, timeout_ms))

        proc.join(timeout=5)
        if proc.is_alive():  # sent a result but wedged on exit
            proc.kill()
            proc.join()
        parent_conn.close()
        elapsed_ms = int((time.perf_counter() - start) * 1000)

    if payload is None:
        return InvocationOutcome(
            status="runtime_error",
            error_message=f"worker exited without result (exit code {proc.exitcode})",
            elapsed_ms=elapsed_ms,
        )
    envelope = json.loads(payload.decode("utf-8"))
    if envelope["status"] == "ok":
        for index, state in envelope.get("host_states", ()):
            target = args[index]
            if hasattr(target, "__sandbox_apply__"):
                target.__sandbox_apply__(state)
        return InvocationOutcome(status="ok", value=envelope["value"], elapsed_ms=elapsed_ms)
    return InvocationOutcome(
        status="runtime_error", error_message=envelope["error"], elapsed_ms=elapsed_ms
    )
