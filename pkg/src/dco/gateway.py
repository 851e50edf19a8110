"""HTTP boundary consumed by the playground UI, plus the demo editor object
generated actions run against.

The demo document is a headless stand-in for the desktop text widget: it
exposes the same coordinate-style get/delete/insert calls, a canned open
dialog, and a warning recorder. Generated code mutates it inside the sandbox
worker; the post-call state is round-tripped back (see sandbox host-object
protocol) and reported to clients, which render effects rather than running
generated code themselves.
"""

from __future__ import annotations

import inspect
import logging
from concurrent.futures import ThreadPoolExecutor
from concurrent.futures import TimeoutError as FutureTimeout
from importlib import resources
from pathlib import Path

from fastapi import FastAPI, HTTPException
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from .code_loader import FunctionRegistry, compile_block, register
from .config import ServiceConfig
from .directive_store import DirectiveStore, load_directives
from .errors import DcoError, EmptyTextError, UnknownDirectiveError
from .llm_client import Backend, HttpBackend, MockBackend, ReplayBackend
from .orchestrator import BlockStore, GeneratedBlock, Orchestrator

logger = logging.getLogger(__name__)

INVOKE_DEADLINE_SLACK_MS = 5000


def packaged_data(name: str) -> Path:
    return Path(str(resources.files("dco.data").joinpath(name)))


class TextModel:
    """Minimal text-widget shim: "1.0" is the document start, "end" the end,
    "end-1c" the end minus the trailing newline convention."""

    def __init__(self, content: str = ""):
        self.content = content

    def get(self, start: str = "1.0", end: str = "end-1c") -> str:
        if start != "1.0":
            raise ValueError(f"unsupported start index: {start!r}")
        return self.content

    def delete(self, start: str = "1.0", end: str = "end") -> None:
        if start != "1.0":
            raise ValueError(f"unsupported start index: {start!r}")
        self.content = ""

    def insert(self, index: str, text: str) -> None:
        if index in ("end", "end-1c"):
            self.content += text
        elif index == "1.0":
            self.content = text + self.content
        else:
            raise ValueError(f"unsupported insert index: {index!r}")


class DemoEditor:
    """Invocation target for editor directives whose entry points take `self`."""

    def __init__(self, open_path: Path | None = None, save_path: Path | None = None):
        self.text = TextModel()
        self.warnings: list[dict] = []
        self._open_path = open_path or packaged_data("demo/sample.txt")
        self._save_path = save_path

    def ask_open_filename(self) -> str:
        return str(self._open_path)

    def ask_save_filename(self) -> str:
        if self._save_path is None:
            raise RuntimeError("no save destination configured")
        return str(self._save_path)

    def show_warning(self, title: str, message: str) -> None:
        self.warnings.append({"title": title, "message": message})

    # sandbox host-object state protocol
    def __sandbox_state__(self) -> dict:
        return {"text": self.text.content, "warnings": self.warnings}

    def __sandbox_apply__(self, state: dict) -> None:
        self.text.content = state["text"]
        self.warnings = state["warnings"]

    def snapshot(self) -> dict:
        return self.__sandbox_state__()


class ServiceState:
    def __init__(self, config: ServiceConfig):
        self.config = config
        directives_path = config.directives_path or packaged_data("editor.directives.json")
        self.store: DirectiveStore = load_directives(directives_path)
        self.registry = FunctionRegistry()
        self.backend = make_backend(config)
        self.block_store = BlockStore(config.blocks_path)
        self.orchestrator = Orchestrator(
            self.store, self.backend, self.registry, config.runtime, self.block_store
        )
        self.editor = DemoEditor()
        self._invoke_pool = ThreadPoolExecutor(max_workers=8)
        self._restore_ready_blocks()

    def _restore_ready_blocks(self) -> None:
        """Sources are the durable artifact: recompile and re-register the
        newest persisted ready block of each directive on boot."""
        newest: dict[str, GeneratedBlock] = {}
        for block in self.block_store.records():
            if block.status == "ready":
                newest[block.directive_id] = block
        for block in newest.values():
            try:
                unit = compile_block(block.source)
                register(unit, self.registry, block.directive_id, block.directive_version)
                self.orchestrator.prime_cache(block)
            except DcoError as exc:
                logger.warning("could not restore block for %r: %s", block.directive_id, exc)

    def _prepare_args(self, handle, args: list) -> list:
        """Editor-style entry points take the demo editor as `self`."""
        try:
            params = list(inspect.signature(handle).parameters)
        except (TypeError, ValueError):
            params = []
        if params[:1] == ["self"]:
            return [self.editor, *args]
        return args

    def invoke(self, directive_id: str, args: list):
        return self.orchestrator.invoke_action(directive_id, args, self._prepare_args)

    def close(self) -> None:
        self._invoke_pool.shutdown(wait=False, cancel_futures=True)


def make_backend(config: ServiceConfig) -> Backend:
    if config.backend == "mock":
        path = config.mock_scripts_path or packaged_data("editor.mock.json")
        return MockBackend.from_file(path)
    if config.backend == "replay":
        return ReplayBackend(config.fixtures_path)
    if config.backend == "http":
        return HttpBackend()
    raise ValueError(f"unknown backend: {config.backend!r}")


class UpdateBody(BaseModel):
    text: str


class InvokeBody(BaseModel):
    args: list = []


class PurgeBody(BaseModel):
    scope: str | dict = "all"


def _directive_json(directive) -> dict:
    return {
        "id": directive.id,
        "entry_point": directive.entry_point,
        "text": directive.text,
        "context_sources": list(directive.context_sources),
        "policy": directive.policy.to_json(),
        "version": directive.version,
    }


def create_app(state: ServiceState) -> FastAPI:
    app = FastAPI(title="dynamic code orchestration service")
    app.state.service = state
    # Local demo tool: the playground may be served from any static origin.
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )

    @app.exception_handler(UnknownDirectiveError)
    async def _unknown(_, exc: UnknownDirectiveError):
        return JSONResponse(status_code=404, content={"error": str(exc)})

    @app.exception_handler(EmptyTextError)
    async def _empty(_, exc: EmptyTextError):
        return JSONResponse(status_code=422, content={"error": str(exc)})

    @app.get("/api/health")
    def health():
        return {"status": "ok"}

    @app.get("/api/directives")
    def list_directives():
        return {"directives": [_directive_json(d) for d in state.store.all()]}

    @app.get("/api/directives/{directive_id}")
    def get_directive(directive_id: str):
        return _directive_json(state.store.get(directive_id))

    @app.put("/api/directives/{directive_id}")
    def update_directive(directive_id: str, body: UpdateBody):
        return _directive_json(state.store.update_text(directive_id, body.text))

    @app.post("/api/directives/{directive_id}/invoke")
    def invoke(directive_id: str, body: InvokeBody):
        directive = state.store.get(directive_id)
        deadline_s = (directive.policy.timeout_ms + INVOKE_DEADLINE_SLACK_MS) / 1000
        future = state._invoke_pool.submit(state.invoke, directive_id, body.args)
        try:
            result = future.result(timeout=deadline_s)
        except FutureTimeout:
            partial = state.block_store.records(directive_id)
            return JSONResponse(status_code=504, content={
                "error": "invocation deadline exceeded",
                "block": partial[-1].to_json() if partial else None,
            })
        return {
            "outcome": result.outcome.to_json() if result.outcome else None,
            "block": result.block.to_json(),
            "effects": state.editor.snapshot(),
        }

    @app.post("/api/directives/{directive_id}/regenerate")
    def regenerate(directive_id: str):
        directive = state.store.get(directive_id)
        block = state.orchestrator.generate_block(directive)
        if directive.policy.cache == "cached" and block.status == "ready":
            state.orchestrator.prime_cache(block)
        return block.to_json()

    @app.get("/api/blocks")
    def blocks(directive: str | None = None):
        return {"blocks": [b.to_json() for b in state.block_store.records(directive)]}

    @app.post("/api/purge")
    def purge(body: PurgeBody):
        scope = body.scope
        if isinstance(scope, dict):
            if "older_than_ms" not in scope:
                raise HTTPException(status_code=422, detail="older_than_ms required")
            count = state.orchestrator.purge_blocks("older_than", int(scope["older_than_ms"]))
        elif scope in ("all", "failed_only"):
            count = state.orchestrator.purge_blocks(scope)
        else:
            raise HTTPException(status_code=422, detail=f"unknown purge scope: {scope!r}")
        return {"purged": count}

    return app


def serve(config: ServiceConfig) -> None:
    """Run the service until interrupted; startup failures exit nonzero."""
    import uvicorn

    state = ServiceState(config)
    app = create_app(state)
    uvicorn.run(app, host="127.0.0.1", port=config.port, log_level="warning")
