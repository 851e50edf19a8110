"""Categorized failure records produced by the generation/invocation pipeline."""

from __future__ import annotations

from dataclasses import dataclass

# Pipeline stages, in execution order.
STAGES = ("generate", "extract", "guard", "compile", "register", "invoke", "test")

CATEGORIES = (
    "ExtractionFailure",
    "CompileError",
    "MissingEntryPoint",
    "DisallowedImport",
    "Timeout",
    "RuntimeError",
    "TestFailure",
    "BackendError",
)

# Each category may only be reported by the stage(s) that can detect it.
_CATEGORY_STAGES = {
    "BackendError": {"generate"},
    "ExtractionFailure": {"extract"},
    "DisallowedImport": {"guard"},
    "CompileError": {"compile"},
    "MissingEntryPoint": {"register"},
    "RuntimeError": {"register", "invoke", "test"},
    "Timeout": {"invoke", "test"},
    "TestFailure": {"test"},
}


@dataclass(frozen=True)
class FailureRecord:
    category: str
    detail: str
    stage: str

    def __post_init__(self):
        if self.category not in _CATEGORY_STAGES:
            raise ValueError(f"unknown failure category: {self.category!r}")
        if self.stage not in STAGES:
            raise ValueError(f"unknown pipeline stage: {self.stage!r}")
        if self.stage not in _CATEGORY_STAGES[self.category]:
            raise ValueError(
                f"category {self.category} cannot occur at stage {self.stage}"
            )

    def to_json(self) -> dict:
        return {"category": self.category, "detail": self.detail, "stage": self.stage}

    @classmethod
    def from_json(cls, obj: dict) -> "FailureRecord":
        return cls(category=obj["category"], detail=obj["detail"], stage=obj["stage"])
