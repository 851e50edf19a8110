"""Compiles extracted source into executable blocks and binds the functions
they define into a live registry.

The registry is an explicit object rather than the process globals: that
keeps purging and tests tractable. Generated code still sees previously
registered functions, because each block executes in a namespace pre-seeded
with the current bindings (so blocks can call each other).
"""

from __future__ import annotations

import builtins
import hashlib
import logging
import threading
import time
import types
from dataclasses import dataclass, field

from .errors import (
    BlockExecutionError,
    CompileBlockError,
    MissingEntryPointError,
    NoFunctionsDefinedError,
)

logger = logging.getLogger(__name__)


def source_hash(source: str) -> str:
    return hashlib.sha256(source.encode("utf-8")).hexdigest()


@dataclass
class CompiledUnit:
    source: str
    source_hash: str
    code: types.CodeType
    # Filled in by register(): compile alone runs no top-level code.
    defined_names: list[str] = field(default_factory=list)


@dataclass(frozen=True)
class Binding:
    handle: object
    directive_id: str
    directive_version: int
    source_hash: str
    source: str
    registered_at: float


class FunctionRegistry:
    """Entry-point name -> callable. Concurrent resolves are safe; registration
    is serialized and replaces existing names atomically."""

    def __init__(self):
        self._bindings: dict[str, Binding] = {}
        self._lock = threading.Lock()

    def __len__(self) -> int:
        return len(self._bindings)

    def names(self) -> list[str]:
        return list(self._bindings)

    def snapshot(self) -> dict[str, object]:
        """Current name -> handle view, exposed to executing blocks."""
        return {name: b.handle for name, b in self._bindings.items()}

    def resolve(self, entry_point: str):
        binding = self._bindings.get(entry_point)
        if binding is None:
            raise MissingEntryPointError(entry_point)
        if not callable(binding.handle):
            raise MissingEntryPointError(entry_point, "is not callable")
        return binding.handle

    def metadata(self, entry_point: str) -> Binding:
        binding = self._bindings.get(entry_point)
        if binding is None:
            raise MissingEntryPointError(entry_point)
        return binding

    def bind_all(self, handles: dict[str, object], directive_id: str,
                 directive_version: int, unit_hash: str, source: str) -> None:
        registered_at = time.time()
        with self._lock:
            for name, handle in handles.items():
                previous = self._bindings.get(name)
                if previous is not None and previous.directive_id != directive_id:
                    # Shared entry points across directives: last registration wins.
                    logger.warning(
                        "entry point %r rebound from directive %r to %r",
                        name, previous.directive_id, directive_id,
                    )
                self._bindings[name] = Binding(
                    handle=handle,
                    directive_id=directive_id,
                    directive_version=directive_version,
                    source_hash=unit_hash,
                    source=source,
                    registered_at=registered_at,
                )


def compile_block(source: str) -> CompiledUnit:
    """Compile source to a code object; no top-level statement runs yet."""
    if not source.strip():
        raise CompileBlockError(1, "empty source")
    try:
        code = compile(source, "<generated>", "exec")
    except SyntaxError as exc:
        raise CompileBlockError(exc.lineno or 1, exc.msg or "invalid syntax") from exc
    return CompiledUnit(source=source, source_hash=source_hash(source), code=code)


def register(unit: CompiledUnit, registry: FunctionRegistry,
             directive_id: str, directive_version: int) -> list[str]:
    """Run the unit's top level and bind every function it defines.

    The namespace is discarded on failure, so a unit that raises mid-execution
    leaves the registry exactly as before.
    """
    namespace: dict[str, object] = {"__builtins__": builtins}
    namespace.update(registry.snapshot())
    try:
        exec(unit.code, namespace)
    except BaseException as exc:
        raise BlockExecutionError(f"{type(exc).__name__}: {exc}") from exc
    # Harvest only functions this unit defined (their globals are this
    # namespace); from-imports and classes stay in the block's own scope.
    defined = {
        name: value
        for name, value in namespace.items()
        if isinstance(value, types.FunctionType) and value.__globals__ is namespace
    }
    if not defined:
        raise NoFunctionsDefinedError()
    registry.bind_all(defined, directive_id, directive_version, unit.source_hash, unit.source)
    unit.defined_names = list(defined)
    return list(defined)


def resolve(registry: FunctionRegistry, entry_point: str):
    return registry.resolve(entry_point)
