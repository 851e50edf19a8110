from __future__ import annotations

import json

import pytest

from dco.directive_store import (
    Directive,
    GenerationPolicy,
    load_directives,
    write_directives,
)
from dco.errors import (
    DirectivesParseError,
    DuplicateIdError,
    EmptyTextError,
    UnknownDirectiveError,
)
from dco.gateway import packaged_data


def test_load_single_directive(directives_file):
    store = load_directives(directives_file)
    assert len(store) == 2
    directive = store.get("open_file")
    assert directive.version == 1
    assert directive.entry_point == "onOpenDynamic"


def test_duplicate_id_rejected(tmp_path):
    path = tmp_path / "dup.json"
    entry = {"id": "open_file", "entry_point": "f", "text": "Do the thing."}
    path.write_text(json.dumps({"directives": [entry, entry]}), encoding="utf-8")
    with pytest.raises(DuplicateIdError):
        load_directives(path)


def test_bundled_editor_directives_load():
    store = load_directives(packaged_data("editor.directives.json"))
    directive = store.get("open_file")
    assert directive.entry_point == "onOpenDynamic"
    assert directive.text.startswith("Create a single function named onOpenDynamic.")
    assert directive.policy.mode == "deterministic"
    assert directive.policy.temperature == 0


def test_missing_file():
    with pytest.raises(FileNotFoundError):
        load_directives("/nonexistent/directives.json")


def test_parse_error_carries_line(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text('{"directives": [{"id": "x"}]}', encoding="utf-8")
    with pytest.raises(DirectivesParseError) as err:
        load_directives(path)
    assert "entry_point" in str(err.value)


def test_update_text_increments_version(directives_file):
    store = load_directives(directives_file)
    updated = store.update_text("open_file", "Open a file. If there is already content in the text area - warn the user!")
    assert updated.version == 2
    assert updated.text.endswith("warn the user!")
    assert store.get("open_file").version == 2


def test_update_with_identical_text_still_increments(directives_file):
    store = load_directives(directives_file)
    text = store.get("open_file").text
    store.update_text("open_file", text)
    assert store.update_text("open_file", text).version == 3


def test_update_unknown_id(directives_file):
    store = load_directives(directives_file)
    with pytest.raises(UnknownDirectiveError):
        store.update_text("zzz", "anything")


def test_update_empty_text(directives_file):
    store = load_directives(directives_file)
    with pytest.raises(EmptyTextError):
        store.update_text("open_file", "   \n  ")


def test_get_unknown(directives_file):
    store = load_directives(directives_file)
    with pytest.raises(UnknownDirectiveError):
        store.get("missing")


def test_n_updates_give_version_1_plus_n(directives_file):
    store = load_directives(directives_file)
    for n in range(1, 8):
        assert store.update_text("open_file", f"Edit number {n}.").version == 1 + n


def test_round_trip(tmp_path, directives_file):
    store = load_directives(directives_file)
    store.update_text("open_file", "Edited text, version bumped before write.")
    out = tmp_path / "out.json"
    write_directives(store, out)
    reloaded = load_directives(out)
    assert reloaded.ids() == store.ids()
    for directive_id in store.ids():
        a, b = store.get(directive_id), reloaded.get(directive_id)
        assert a.text == b.text
        assert a.entry_point == b.entry_point
        assert a.policy == b.policy
        assert b.version == 1  # versions reset on reload


def test_crlf_normalized_on_load(tmp_path):
    path = tmp_path / "crlf.json"
    path.write_text(json.dumps({"directives": [
        {"id": "x", "entry_point": "f", "text": "line one\r\nline two"},
    ]}), encoding="utf-8")
    assert load_directives(path).get("x").text == "line one\nline two"


def test_policy_defaults():
    policy = GenerationPolicy.from_json({})
    assert policy.mode == "deterministic"
    assert policy.temperature == 0
    assert policy.cache == "cached"
    assert policy.timeout_ms == 2000
    assert policy.import_policy == "deny"
    assert policy.allowlist == ()


def test_deterministic_requires_zero_temperature():
    with pytest.raises(ValueError):
        GenerationPolicy(mode="deterministic", temperature=0.5)


def test_temperature_range():
    with pytest.raises(ValueError):
        GenerationPolicy(mode="diverse", temperature=2.5)


def test_entry_point_grammar():
    with pytest.raises(ValueError):
        Directive(id="x", entry_point="not-valid!", text="Do something.")
