"""Assembles the system prompt (skeleton source inlined) and per-directive requests."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

from .config import RuntimeConfig
from .directive_store import Directive
from .errors import MissingPlaceholderError

CONTEXT_PLACEHOLDER = "{CONTEXT}"

# Header line prefixed to each inlined context file, so parser tests can tell
# context echo apart from generated code.
FILE_HEADER = "### FILE: "

FENCED_INSTRUCTION = (
    "Return only the function source inside one fenced code block "
    "delimited by three back ticks."
)

# The "code" field name is this project's convention; the envelope format is
# otherwise free-form JSON.
JSON_ENVELOPE_INSTRUCTION = (
    'Return a JSON object with a single string field "code" holding the '
    "function source."
)

RESPONSE_CONTRACTS = ("fenced", "json_envelope")


@dataclass(frozen=True)
class PromptBundle:
    system_text: str
    user_text: str
    model_id: str
    temperature: float
    response_contract: str


def build_system_prompt(
    context_sources: list[str] | tuple[str, ...],
    template: str,
    base_dir: Path | None = None,
) -> str:
    """Replace {CONTEXT} in the template with the concatenated context files,
    each preceded by a `### FILE: <path>` header."""
    if CONTEXT_PLACEHOLDER not in template:
        raise MissingPlaceholderError()
    parts = []
    for source in context_sources:
        path = Path(source)
        if base_dir is not None and not path.is_absolute():
            path = base_dir / path
        if not path.exists():
            raise FileNotFoundError(str(path))
        content = path.read_text(encoding="utf-8")
        parts.append(f"{FILE_HEADER}{source}\n{content}")
    return template.replace(CONTEXT_PLACEHOLDER, "\n".join(parts))


def contract_instruction(response_contract: str) -> str:
    if response_contract == "fenced":
        return FENCED_INSTRUCTION
    if response_contract == "json_envelope":
        return JSON_ENVELOPE_INSTRUCTION
    raise ValueError(f"unknown response contract: {response_contract!r}")


def build_request(
    directive: Directive, system_text: str, config: RuntimeConfig
) -> PromptBundle:
    """Pure function of (directive, system_text, config): identical inputs
    yield byte-identical bundles."""
    temperature = 0.0 if directive.policy.mode == "deterministic" else directive.policy.temperature
    user_text = directive.text + "\n" + contract_instruction(config.response_contract)
    return PromptBundle(
        system_text=system_text,
        user_text=user_text,
        model_id=config.model_id,
        temperature=temperature,
        response_contract=config.response_contract,
    )
