"""Isolates candidate source code from raw LLM replies.

Extraction never raises: unextractable replies come back as classified
failures so the harness can count them.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass

from .failures import FailureRecord

FENCE = "```"
_DEF_RE = re.compile(r"^(async[ \t]+)?def\b")

ENVELOPE_FIELD = "code"


@dataclass(frozen=True)
class ExtractionResult:
    source: str | None = None
    failure: FailureRecord | None = None

    def __post_init__(self):
        if (self.source is None) == (self.failure is None):
            raise ValueError("exactly one of source/failure must be set")
        if self.source is not None and not self.source.strip():
            raise ValueError("extracted source is empty")

    @property
    def ok(self) -> bool:
        return self.source is not None


def _normalize(text: str) -> str:
    return text.replace("\r\n", "\n").replace("\r", "\n")


def _try_fenced(text: str) -> tuple[str | None, str | None]:
    """First complete non-empty fenced block, else (None, reason).

    Fences count only at line starts (mid-line back ticks are prose) and pair
    sequentially: 1st opens, 2nd closes, 3rd opens again. A language tag on
    the opening fence line is discarded with the rest of that line.
    """
    lines = text.split("\n")
    fences = [i for i, line in enumerate(lines) if line.startswith(FENCE)]
    if not fences:
        return None, None
    saw_block = False
    for open_at, close_at in zip(fences[::2], fences[1::2]):
        saw_block = True
        body = "\n".join(lines[open_at + 1 : close_at])
        if body.strip():
            return body, None
    if len(fences) % 2:
        return None, "unterminated fence"
    if saw_block:
        return None, "empty fenced block"
    return None, None


def _try_envelope(text: str) -> str | None:
    try:
        doc = json.loads(text.strip())
    except ValueError:
        return None
    if isinstance(doc, dict):
        code = doc.get(ENVELOPE_FIELD)
        if isinstance(code, str) and code.strip():
            return _normalize(code)
    return None


def _try_bare(text: str) -> str | None:
    trimmed = text.strip()
    if trimmed and _DEF_RE.match(trimmed.split("\n", 1)[0]):
        return trimmed
    return None


def extract_code(reply_text: str, contract: str = "fenced") -> ExtractionResult:
    """Try the contract's strategy first, then the remaining ones; failures of
    one strategy fall through rather than failing hard."""
    text = _normalize(reply_text)

    fenced, fence_reason = _try_fenced(text)
    if contract == "json_envelope":
        source = _try_envelope(text) or fenced
    else:
        source = fenced or _try_envelope(text)
    if source is None:
        source = _try_bare(text)
    if source is not None:
        return ExtractionResult(source=source)

    detail = fence_reason or "no fence, no envelope, no definition keyword"
    return ExtractionResult(
        failure=FailureRecord(category="ExtractionFailure", detail=detail, stage="extract")
    )
