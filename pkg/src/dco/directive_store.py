"""Written-language directives: loading, versioned editing, and lookup.

A directive binds a prose instruction to the entry-point function its
generated block must define. The store is the single source of truth;
the CLI and HTTP service edit through it. Versions are per process run.
"""

from __future__ import annotations

import json
import re
import threading
from dataclasses import dataclass, field, replace
from pathlib import Path

from .errors import (
    DirectivesParseError,
    DuplicateIdError,
    EmptyTextError,
    UnknownDirectiveError,
)

IDENTIFIER_RE = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$")

POLICY_MODES = ("deterministic", "diverse")
CACHE_MODES = ("cached", "ephemeral")
IMPORT_POLICIES = ("deny", "strip", "allow")


@dataclass(frozen=True)
class GenerationPolicy:
    mode: str = "deterministic"
    temperature: float = 0.0
    cache: str = "cached"
    timeout_ms: int = 2000
    import_policy: str = "deny"
    allowlist: tuple[str, ...] = ()

    def __post_init__(self):
        if self.mode not in POLICY_MODES:
            raise ValueError(f"unknown generation mode: {self.mode!r}")
        if self.cache not in CACHE_MODES:
            raise ValueError(f"unknown cache mode: {self.cache!r}")
        if self.import_policy not in IMPORT_POLICIES:
            raise ValueError(f"unknown import policy: {self.import_policy!r}")
        if not 0.0 <= self.temperature <= 2.0:
            raise ValueError(f"temperature out of range [0, 2]: {self.temperature}")
        if self.mode == "deterministic" and self.temperature != 0.0:
            raise ValueError("deterministic mode requires temperature 0")
        if self.timeout_ms < 1:
            raise ValueError(f"timeout_ms must be positive: {self.timeout_ms}")

    def to_json(self) -> dict:
        return {
            "mode": self.mode,
            "temperature": self.temperature,
            "cache": self.cache,
            "timeout_ms": self.timeout_ms,
            "import_policy": self.import_policy,
            "allowlist": list(self.allowlist),
        }

    @classmethod
    def from_json(cls, obj: dict) -> "GenerationPolicy":
        return cls(
            mode=obj.get("mode", "deterministic"),
            temperature=obj.get("temperature", 0.0),
            cache=obj.get("cache", "cached"),
            timeout_ms=obj.get("timeout_ms", 2000),
            import_policy=obj.get("import_policy", "deny"),
            allowlist=tuple(obj.get("allowlist", ())),
        )


@dataclass(frozen=True)
class Directive:
    id: str
    entry_point: str
    text: str
    context_sources: tuple[str, ...] = ()
    policy: GenerationPolicy = field(default_factory=GenerationPolicy)
    version: int = 1

    def __post_init__(self):
        if not self.id:
            raise ValueError("directive id is empty")
        if not IDENTIFIER_RE.match(self.entry_point):
            raise ValueError(f"entry_point is not a valid identifier: {self.entry_point!r}")
        if not self.text.strip():
            raise EmptyTextError(self.id)
        if self.version < 1:
            raise ValueError(f"version must be >= 1: {self.version}")


def _normalize_text(text: str) -> str:
    # CRLF -> LF on load; trailing whitespace kept (directives are prose).
    return text.replace("\r\n", "\n").replace("\r", "\n")


def _parse_directive(obj: dict, index: int) -> Directive:
    try:
        policy = GenerationPolicy.from_json(obj.get("policy", {}))
        return Directive(
            id=obj["id"],
            entry_point=obj["entry_point"],
            text=_normalize_text(obj["text"]),
            context_sources=tuple(obj.get("context_sources", ())),
            policy=policy,
            version=1,
        )
    except KeyError as exc:
        raise DirectivesParseError(index, f"directive #{index} missing field {exc}") from exc
    except (ValueError, TypeError, EmptyTextError) as exc:
        raise DirectivesParseError(index, f"directive #{index}: {exc}") from exc


class DirectiveStore:
    """In-memory directive set. Reads are lock-free on immutable snapshots;
    updates are serialized so a reader never sees a torn directive."""

    def __init__(self, directives: dict[str, Directive], base_dir: Path | None = None):
        self._directives = dict(directives)
        self._lock = threading.RLock()
        # Context source paths resolve relative to the file the set came from.
        self.base_dir = base_dir

    def __len__(self) -> int:
        return len(self._directives)

    def ids(self) -> list[str]:
        return list(self._directives)

    def all(self) -> list[Directive]:
        return list(self._directives.values())

    def get(self, directive_id: str) -> Directive:
        try:
            return self._directives[directive_id]
        except KeyError:
            raise UnknownDirectiveError(directive_id) from None

    def update_text(self, directive_id: str, new_text: str) -> Directive:
        """Replace a directive's text; every edit is an event, so the version
        increments even when the text is unchanged."""
        new_text = _normalize_text(new_text)
        if not new_text.strip():
            raise EmptyTextError(directive_id)
        with self._lock:
            current = self.get(directive_id)
            updated = replace(current, text=new_text, version=current.version + 1)
            self._directives[directive_id] = updated
            return updated

    def add(self, directive: Directive) -> None:
        with self._lock:
            if directive.id in self._directives:
                raise DuplicateIdError(directive.id)
            self._directives[directive.id] = directive


def load_directives(path: str | Path) -> DirectiveStore:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(str(path))
    raw = path.read_text(encoding="utf-8")
    try:
        doc = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise DirectivesParseError(exc.lineno, exc.msg) from exc
    entries = doc.get("directives")
    if not isinstance(entries, list):
        raise DirectivesParseError(1, 'top-level "directives" list missing')
    directives: dict[str, Directive] = {}
    for index, obj in enumerate(entries, start=1):
        directive = _parse_directive(obj, index)
        if directive.id in directives:
            raise DuplicateIdError(directive.id)
        directives[directive.id] = directive
    return DirectiveStore(directives, base_dir=path.parent)


def write_directives(store: DirectiveStore, path: str | Path) -> None:
    """Serialize the set back to the directives file format. Versions are not
    persisted; a reload starts every directive at version 1."""
    doc = {
        "directives": [
            {
                "id": d.id,
                "entry_point": d.entry_point,
                "text": d.text,
                "context_sources": list(d.context_sources),
                "policy": d.policy.to_json(),
            }
            for d in store.all()
        ]
    }
    Path(path).write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")
