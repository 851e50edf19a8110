"""Runtime configuration, resolved from defaults, flags, and environment."""

from __future__ import annotations

import os
from dataclasses import dataclass, field, replace
from pathlib import Path

ENV_API_KEY = "DCO_API_KEY"
ENV_ENDPOINT = "DCO_ENDPOINT"
ENV_MODEL = "DCO_MODEL"

DEFAULT_MODEL = "gpt-3.5-turbo"

# Default system prompt; {CONTEXT} is replaced with the inlined skeleton sources.
DEFAULT_SYSTEM_TEMPLATE = (
    "You are a programmer. You should use the preexisting code in the file "
    "DynamicTextEditor.py and create the requested functions so the code operates "
    "without error. Pay attention to the imports in DynamicTextEditor and choose "
    "code that works within those imports.\n{CONTEXT}"
)


@dataclass(frozen=True)
class RuntimeConfig:
    model_id: str = DEFAULT_MODEL
    system_template: str = DEFAULT_SYSTEM_TEMPLATE
    response_contract: str = "fenced"  # or "json_envelope"
    timeout_ms: int = 2000
    parallelism: int = 4
    eval_temperature: float = 0.8
    store_raw_response: bool = True
    context_base_dir: Path | None = None
    std_modules_path: Path | None = None  # None -> packaged list

    def with_overrides(self, **kwargs) -> "RuntimeConfig":
        return replace(self, **{k: v for k, v in kwargs.items() if v is not None})

    @classmethod
    def from_env(cls, **overrides) -> "RuntimeConfig":
        cfg = cls(model_id=os.environ.get(ENV_MODEL, DEFAULT_MODEL))
        return cfg.with_overrides(**overrides)


@dataclass(frozen=True)
class ServiceConfig:
    port: int = 8350
    backend: str = "mock"  # mock | replay | http
    directives_path: Path | None = None  # None -> bundled editor directives
    fixtures_path: Path | None = None
    blocks_path: Path = field(default_factory=lambda: Path("blocks.jsonl"))
    mock_scripts_path: Path | None = None  # None -> bundled editor scripts
    runtime: RuntimeConfig = field(default_factory=RuntimeConfig.from_env)

    def __post_init__(self):
        if not 1 <= self.port <= 65535:
            raise ValueError(f"port out of range: {self.port}")
        if self.backend == "replay" and self.fixtures_path is None:
            raise ValueError("replay backend requires a fixtures path")
