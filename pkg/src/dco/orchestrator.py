"""Pipeline controller: directive -> prompt -> completion -> extract -> guard
-> compile -> register -> invoke, with block caching, persistence, and purge.
"""

from __future__ import annotations

import hashlib
import json
import logging
import threading
import time
from dataclasses import dataclass, replace
from datetime import datetime, timezone
from pathlib import Path

from . import code_loader, sandbox
from .code_loader import FunctionRegistry
from .config import RuntimeConfig
from .directive_store import Directive, DirectiveStore
from .errors import (
    BackendFailure,
    BlockExecutionError,
    CompileBlockError,
    MissingEntryPointError,
    NoFunctionsDefinedError,
)
from .failures import FailureRecord
from .llm_client import Backend, CompletionRequest
from .prompt_builder import build_request, build_system_prompt
from .response_parser import extract_code
from .sandbox import InvocationOutcome

logger = logging.getLogger(__name__)


def _now_ms() -> int:
    return time.time_ns() // 1_000_000


def _iso(ms: int) -> str:
    stamp = datetime.fromtimestamp(ms / 1000.0, tz=timezone.utc)
    return stamp.isoformat(timespec="milliseconds").replace("+00:00", "Z")


def _parse_iso(text: str) -> int:
    stamp = datetime.fromisoformat(text.replace("Z", "+00:00"))
    return int(stamp.timestamp() * 1000)


@dataclass(frozen=True)
class GeneratedBlock:
    directive_id: str
    directive_version: int
    cache_key: str
    raw_response: str
    source: str
    source_hash: str
    status: str  # ready | failed
    failure: FailureRecord | None
    created_at: int  # UTC milliseconds

    def __post_init__(self):
        ready = self.status == "ready"
        if ready != (self.failure is None) or (ready and not self.source.strip()):
            raise ValueError("ready blocks carry source and no failure; failed blocks the reverse")

    def to_json(self) -> dict:
        return {
            "directive_id": self.directive_id,
            "directive_version": self.directive_version,
            "cache_key": self.cache_key,
            "raw_response": self.raw_response,
            "source": self.source,
            "source_hash": self.source_hash,
            "status": self.status,
            "failure": self.failure.to_json() if self.failure else None,
            "created_at": _iso(self.created_at),
        }

    @classmethod
    def from_json(cls, obj: dict) -> "GeneratedBlock":
        failure = obj.get("failure")
        return cls(
            directive_id=obj["directive_id"],
            directive_version=obj["directive_version"],
            cache_key=obj["cache_key"],
            raw_response=obj.get("raw_response", ""),
            source=obj.get("source", ""),
            source_hash=obj.get("source_hash", ""),
            status=obj["status"],
            failure=FailureRecord.from_json(failure) if failure else None,
            created_at=_parse_iso(obj["created_at"]),
        )


@dataclass(frozen=True)
class InvocationResult:
    outcome: InvocationOutcome | None  # None when generation failed
    block: GeneratedBlock

    @property
    def ok(self) -> bool:
        return self.outcome is not None and self.outcome.status == "ok"


class BlockStore:
    """Append-only JSONL record of every generation attempt; purge rewrites
    the file. A None path keeps records in memory only."""

    def __init__(self, path: str | Path | None):
        self.path = Path(path) if path is not None else None
        self._lock = threading.Lock()
        self._records: list[GeneratedBlock] = []
        if self.path is not None and self.path.exists():
            for line in self.path.read_text(encoding="utf-8").splitlines():
                if line.strip():
                    self._records.append(GeneratedBlock.from_json(json.loads(line)))

    def append(self, block: GeneratedBlock) -> None:
        with self._lock:
            self._records.append(block)
            if self.path is not None:
                with self.path.open("a", encoding="utf-8") as fh:
                    fh.write(json.dumps(block.to_json()) + "\n")

    def records(self, directive_id: str | None = None) -> list[GeneratedBlock]:
        with self._lock:
            out = list(self._records)
        if directive_id is not None:
            out = [b for b in out if b.directive_id == directive_id]
        return out

    def purge(self, scope: str = "all", older_than_ms: int | None = None) -> int:
        if scope not in ("all", "failed_only", "older_than"):
            raise ValueError(f"unknown purge scope: {scope!r}")
        if scope == "older_than" and older_than_ms is None:
            raise ValueError("older_than scope requires older_than_ms")
        cutoff = _now_ms() - (older_than_ms or 0)
        with self._lock:
            if scope == "all":
                keep = []
            elif scope == "failed_only":
                keep = [b for b in self._records if b.status != "failed"]
            else:
                keep = [b for b in self._records if b.created_at > cutoff]
            purged = len(self._records) - len(keep)
            self._records = keep
            if self.path is not None:
                body = "".join(json.dumps(b.to_json()) + "\n" for b in keep)
                self.path.write_text(body, encoding="utf-8")
        return purged


class Orchestrator:
    def __init__(
        self,
        store: DirectiveStore | None,
        backend: Backend,
        registry: FunctionRegistry,
        config: RuntimeConfig,
        block_store: BlockStore | None = None,
    ):
        self.store = store
        self.backend = backend
        self.registry = registry
        self.config = config
        self.block_store = block_store if block_store is not None else BlockStore(None)
        self._std_modules = sandbox.load_std_modules(config.std_modules_path)
        # cache_key -> ready block, for cached-mode reuse
        self._ready: dict[str, GeneratedBlock] = {}
        self._ready_lock = threading.Lock()
        # single-flight: one generation per directive at a time
        self._flights: dict[str, threading.Lock] = {}
        self._flights_lock = threading.Lock()

    # -- keys ---------------------------------------------------------------

    def cache_key(self, directive: Directive) -> str:
        """Content hash deciding block reuse. Version is deliberately absent:
        a no-op edit must not force regeneration, a text change must."""
        temperature = 0.0 if directive.policy.mode == "deterministic" else directive.policy.temperature
        payload = "\n".join(
            [
                directive.text,
                directive.entry_point,
                self.config.system_template,
                self.config.model_id,
                directive.policy.mode,
                f"{temperature:.6f}",
            ]
        )
        return hashlib.sha256(payload.encode("utf-8")).hexdigest()

    # -- generation pipeline -------------------------------------------------

    def _failed(self, directive: Directive, key: str, raw: str, source: str,
                failure: FailureRecord) -> GeneratedBlock:
        block = GeneratedBlock(
            directive_id=directive.id,
            directive_version=directive.version,
            cache_key=key,
            raw_response=raw if self.config.store_raw_response else "",
            source=source,
            source_hash=code_loader.source_hash(source) if source else "",
            status="failed",
            failure=failure,
            created_at=_now_ms(),
        )
        self.block_store.append(block)
        return block

    def generate_block(self, directive: Directive, sample_index: int | None = None) -> GeneratedBlock:
        """Run the full pipeline once; the first failing stage short-circuits
        into a failed block. Never raises for pipeline failures."""
        key = self.cache_key(directive)
        base_dir = self.store.base_dir if self.store is not None else self.config.context_base_dir

        system_text = build_system_prompt(
            directive.context_sources, self.config.system_template, base_dir
        )
        bundle = build_request(directive, system_text, self.config)
        request = CompletionRequest(
            bundle=bundle, directive_id=directive.id, sample_index=sample_index
        )
        try:
            response = self.backend.complete(request)
        except BackendFailure as exc:
            return self._failed(directive, key, "", "", FailureRecord(
                category="BackendError", detail=str(exc), stage="generate"))
        raw = response.text

        extraction = extract_code(raw, bundle.response_contract)
        if not extraction.ok:
            return self._failed(directive, key, raw, "", extraction.failure)
        source = extraction.source

        guarded = sandbox.apply_policy(source, directive.policy, self._std_modules)
        if isinstance(guarded, FailureRecord):
            return self._failed(directive, key, raw, source, guarded)
        source = guarded

        try:
            unit = code_loader.compile_block(source)
        except CompileBlockError as exc:
            return self._failed(directive, key, raw, source, FailureRecord(
                category="CompileError", detail=str(exc), stage="compile"))

        try:
            names = code_loader.register(unit, self.registry, directive.id, directive.version)
        except NoFunctionsDefinedError:
            return self._failed(directive, key, raw, source, FailureRecord(
                category="MissingEntryPoint", detail="no functions defined", stage="register"))
        except BlockExecutionError as exc:
            return self._failed(directive, key, raw, source, FailureRecord(
                category="RuntimeError", detail=str(exc), stage="register"))
        if directive.entry_point not in names:
            return self._failed(directive, key, raw, source, FailureRecord(
                category="MissingEntryPoint",
                detail=f"entry point {directive.entry_point!r} not defined "
                       f"(block defined: {', '.join(names)})",
                stage="register"))

        block = GeneratedBlock(
            directive_id=directive.id,
            directive_version=directive.version,
            cache_key=key,
            raw_response=raw if self.config.store_raw_response else "",
            source=source,
            source_hash=unit.source_hash,
            status="ready",
            failure=None,
            created_at=_now_ms(),
        )
        self.block_store.append(block)
        if directive.policy.cache == "cached":
            with self._ready_lock:
                self._ready[key] = block
        return block

    def prime_cache(self, block: GeneratedBlock) -> None:
        """Re-admit a persisted ready block (service boot re-registration)."""
        if block.status != "ready":
            raise ValueError("only ready blocks can be primed")
        with self._ready_lock:
            self._ready[block.cache_key] = block

    def _flight_lock(self, directive_id: str) -> threading.Lock:
        with self._flights_lock:
            return self._flights.setdefault(directive_id, threading.Lock())

    def obtain_block(self, directive: Directive) -> GeneratedBlock:
        if directive.policy.cache == "ephemeral":
            return self.generate_block(directive)
        key = self.cache_key(directive)
        with self._ready_lock:
            cached = self._ready.get(key)
        if cached is not None:
            return cached
        # Single-flight: concurrent invokes of one directive share the result
        # of exactly one generation.
        with self._flight_lock(directive.id):
            with self._ready_lock:
                cached = self._ready.get(key)
            if cached is not None:
                return cached
            return self.generate_block(directive)

    def invoke_action(self, directive_id: str, args: list | tuple = (),
                      prepare_args=None) -> InvocationResult:
        """Reuse or generate the directive's block, then call its entry point
        under the sandbox guard. `prepare_args(handle, args)` may adapt the
        argument list once the handle is known (the service uses this to pass
        the demo editor to `self`-style entry points)."""
        if self.store is None:
            raise ValueError("orchestrator has no directive store")
        directive = self.store.get(directive_id)
        block = self.obtain_block(directive)
        if block.status != "ready":
            return InvocationResult(outcome=None, block=block)
        try:
            handle = self.registry.resolve(directive.entry_point)
        except MissingEntryPointError as exc:
            failure = FailureRecord(
                category="MissingEntryPoint", detail=str(exc), stage="register")
            return InvocationResult(outcome=None, block=replace(
                block, status="failed", failure=failure, source="", source_hash=""))
        if prepare_args is not None:
            args = prepare_args(handle, list(args))
        outcome = sandbox.invoke_with_timeout(handle, args, directive.policy.timeout_ms)
        return InvocationResult(outcome=outcome, block=block)

    # -- maintenance ----------------------------------------------------------

    def purge_blocks(self, scope: str = "all", older_than_ms: int | None = None) -> int:
        """Delete persisted block records; live registry handles stay bound
        (an in-flight call never loses its function)."""
        purged = self.block_store.purge(scope, older_than_ms)
        cutoff = _now_ms() - (older_than_ms or 0)
        with self._ready_lock:
            if scope == "all":
                self._ready.clear()
            elif scope == "older_than":
                self._ready = {
                    k: b for k, b in self._ready.items() if b.created_at > cutoff
                }
        return purged
