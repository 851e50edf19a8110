"""Completion backends: live HTTP (chat-completions wire format), scripted mock,
and record/replay fixtures keyed by a canonical request hash."""

from __future__ import annotations

import hashlib
import json
import logging
import os
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path

import httpx

from .config import ENV_API_KEY, ENV_ENDPOINT
from .errors import (
    AuthError,
    BackendTimeoutError,
    MissingFixtureError,
    NetworkError,
)
from .prompt_builder import PromptBundle

logger = logging.getLogger(__name__)

REQUEST_TIMEOUT_MS = 30_000
RETRY_BACKOFFS_S = (1.0, 2.0)  # on NetworkError only, never on AuthError


def canonical_serialization(bundle: PromptBundle, sample_index: int | None = None) -> str:
    """Canonical request text that the fixture key hashes. Field-order
    independent by construction; eval mode appends the sample index so k
    samples of one prompt can replay differently."""
    text = "\n".join(
        [bundle.model_id, f"{bundle.temperature:.6f}", bundle.system_text, bundle.user_text]
    )
    if sample_index is not None:
        text += "\n" + str(sample_index)
    return text


def compute_request_key(bundle: PromptBundle, sample_index: int | None = None) -> str:
    payload = canonical_serialization(bundle, sample_index).encode("utf-8")
    return hashlib.sha256(payload).hexdigest()


@dataclass(frozen=True)
class CompletionRequest:
    bundle: PromptBundle
    # Not hashed: routing metadata for the scripted mock and eval replay.
    directive_id: str | None = None
    sample_index: int | None = None
    request_key: str = field(init=False)

    def __post_init__(self):
        object.__setattr__(
            self, "request_key", compute_request_key(self.bundle, self.sample_index)
        )


@dataclass(frozen=True)
class CompletionResponse:
    text: str  # may be empty; an empty reply is data, not an error
    latency_ms: int
    backend: str


class Backend:
    """Base backend: complete() is safe for concurrent calls; subclasses set
    `name` and implement _complete()."""

    name = "base"

    def __init__(self):
        self._calls = 0
        self._calls_lock = threading.Lock()

    @property
    def calls(self) -> int:
        return self._calls

    def complete(self, request: CompletionRequest) -> CompletionResponse:
        with self._calls_lock:
            self._calls += 1
        start = time.perf_counter()
        text = self._complete(request)
        latency_ms = int((time.perf_counter() - start) * 1000)
        return CompletionResponse(text=text, latency_ms=latency_ms, backend=self.name)

    def _complete(self, request: CompletionRequest) -> str:
        raise NotImplementedError


class MockBackend(Backend):
    """Deterministic scripted backend. Scripts are keyed by directive id; a
    list value is consumed one reply per call (the last entry repeats)."""

    name = "mock"

    def __init__(self, scripts: dict | None = None, default: str | None = None,
                 delay_s: float = 0.0):
        super().__init__()
        self._scripts: dict[str, list[str]] = {}
        self._cursors: dict[str, int] = {}
        self._default = default
        self._delay_s = delay_s
        self._lock = threading.Lock()
        for directive_id, replies in (scripts or {}).items():
            self.script(directive_id, replies)

    def script(self, directive_id: str, replies: str | list[str]) -> None:
        if isinstance(replies, str):
            replies = [replies]
        self._scripts[directive_id] = list(replies)
        self._cursors[directive_id] = 0

    def script_default(self, reply: str) -> None:
        self._default = reply

    def _complete(self, request: CompletionRequest) -> str:
        if self._delay_s:
            time.sleep(self._delay_s)
        with self._lock:
            replies = self._scripts.get(request.directive_id or "")
            if replies is None:
                if self._default is None:
                    raise NetworkError(
                        f"mock has no script for directive {request.directive_id!r} "
                        "and no default reply"
                    )
                return self._default
            cursor = self._cursors[request.directive_id]
            reply = replies[min(cursor, len(replies) - 1)]
            self._cursors[request.directive_id] = cursor + 1
            return reply

    @classmethod
    def from_file(cls, path: str | Path, delay_s: float = 0.0) -> "MockBackend":
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
        return cls(scripts=doc.get("scripts", {}), default=doc.get("default"), delay_s=delay_s)


class ReplayBackend(Backend):
    """Returns recorded fixture entries by request key; append-wins on
    duplicate keys."""

    name = "replay"

    def __init__(self, fixture_path: str | Path):
        super().__init__()
        self.fixture_path = Path(fixture_path)
        self._responses = self._load(self.fixture_path)

    @staticmethod
    def _load(path: Path) -> dict[str, str]:
        if not path.exists():
            raise FileNotFoundError(str(path))
        responses: dict[str, str] = {}
        with path.open(encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                entry = json.loads(line)
                responses[entry["key"]] = entry["response"]
        return responses

    def _complete(self, request: CompletionRequest) -> str:
        try:
            return self._responses[request.request_key]
        except KeyError:
            raise MissingFixtureError(request.request_key) from None


_record_lock = threading.Lock()


def record(request: CompletionRequest, response: CompletionResponse,
           fixture_path: str | Path) -> None:
    """Append one fixture entry; a later replay of the same request returns
    the recorded text byte-for-byte."""
    entry = json.dumps({"key": request.request_key, "response": response.text})
    with _record_lock:
        with open(fixture_path, "a", encoding="utf-8") as fh:
            fh.write(entry + "\n")


class HttpBackend(Backend):
    """De-facto chat-completions JSON wire format, so any compatible local or
    remote model serves as the generator."""

    name = "http"

    def __init__(self, endpoint: str | None = None, api_key: str | None = None,
                 transport: httpx.BaseTransport | None = None,
                 sleep=time.sleep):
        super().__init__()
        self.endpoint = endpoint or os.environ.get(ENV_ENDPOINT)
        self.api_key = api_key or os.environ.get(ENV_API_KEY)
        if not self.endpoint:
            raise NetworkError(f"no endpoint configured (set {ENV_ENDPOINT})")
        if not self.api_key:
            raise AuthError(f"no credential configured (set {ENV_API_KEY})")
        self._client = httpx.Client(
            transport=transport, timeout=REQUEST_TIMEOUT_MS / 1000
        )
        self._sleep = sleep

    def _post(self, request: CompletionRequest) -> str:
        bundle = request.bundle
        body = {
            "model": bundle.model_id,
            "temperature": bundle.temperature,
            "messages": [
                {"role": "system", "content": bundle.system_text},
                {"role": "user", "content": bundle.user_text},
            ],
        }
        try:
            reply = self._client.post(
                f"{self.endpoint.rstrip('/')}/chat/completions",
                json=body,
                headers={"Authorization": f"Bearer {self.api_key}"},
            )
        except httpx.TimeoutException as exc:
            raise BackendTimeoutError(str(exc)) from exc
        except httpx.HTTPError as exc:
            raise NetworkError(str(exc)) from exc
        if reply.status_code in (401, 403):
            raise AuthError(f"backend returned {reply.status_code}")
        if reply.status_code >= 400:
            raise NetworkError(f"backend returned {reply.status_code}: {reply.text[:200]}")
        try:
            return reply.json()["choices"][0]["message"]["content"]
        except (KeyError, IndexError, TypeError, ValueError) as exc:
            raise NetworkError(f"malformed completion body: {exc}") from exc

    def _complete(self, request: CompletionRequest) -> str:
        attempt = 0
        while True:
            try:
                return self._post(request)
            except NetworkError:
                if attempt >= len(RETRY_BACKOFFS_S):
                    raise
                self._sleep(RETRY_BACKOFFS_S[attempt])
                attempt += 1
                logger.warning("completion retry %d after network error", attempt)
