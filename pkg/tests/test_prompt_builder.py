from __future__ import annotations

import pytest

from dco.config import DEFAULT_SYSTEM_TEMPLATE, RuntimeConfig
from dco.errors import MissingPlaceholderError
from dco.prompt_builder import (
    FENCED_INSTRUCTION,
    JSON_ENVELOPE_INSTRUCTION,
    build_request,
    build_system_prompt,
)
from dco.gateway import packaged_data

from conftest import make_directive


def test_default_template_with_skeleton():
    base = packaged_data("")
    out = build_system_prompt(
        ["skeleton/editor_skeleton.txt"], DEFAULT_SYSTEM_TEMPLATE, base
    )
    assert out.startswith("You are a programmer.")
    assert "### FILE: skeleton/editor_skeleton.txt" in out
    assert "DynamicTextEditor" in out


def test_empty_context_sources():
    out = build_system_prompt([], "prefix {CONTEXT} suffix")
    assert out == "prefix  suffix"


def test_missing_placeholder():
    with pytest.raises(MissingPlaceholderError):
        build_system_prompt([], "no placeholder here")


def test_missing_context_file(tmp_path):
    with pytest.raises(FileNotFoundError):
        build_system_prompt(["nope.txt"], "{CONTEXT}", tmp_path)


def test_context_concatenation_order(tmp_path):
    (tmp_path / "a.txt").write_text("AAA", encoding="utf-8")
    (tmp_path / "b.txt").write_text("BBB", encoding="utf-8")
    out = build_system_prompt(["a.txt", "b.txt"], "{CONTEXT}", tmp_path)
    assert out == "### FILE: a.txt\nAAA\n### FILE: b.txt\nBBB"


def test_deterministic_request_temperature_zero(config):
    directive = make_directive(mode="deterministic")
    bundle = build_request(directive, "sys", config)
    assert bundle.temperature == 0.0
    assert bundle.user_text.startswith("Create a single function named onOpenDynamic.")


def test_diverse_request_keeps_temperature(config):
    directive = make_directive(mode="diverse", temperature=0.9)
    bundle = build_request(directive, "sys", config)
    assert bundle.temperature == 0.9


def test_fenced_contract_instruction(config):
    directive = make_directive()
    bundle = build_request(directive, "sys", config)
    assert bundle.user_text.endswith(FENCED_INSTRUCTION)
    assert bundle.response_contract == "fenced"


def test_envelope_contract_instruction():
    config = RuntimeConfig(response_contract="json_envelope")
    bundle = build_request(make_directive(), "sys", config)
    assert JSON_ENVELOPE_INSTRUCTION in bundle.user_text


def test_build_request_is_pure(config):
    directive = make_directive()
    assert build_request(directive, "sys", config) == build_request(directive, "sys", config)
