from __future__ import annotations

import json
import threading

import pytest

from dco.code_loader import FunctionRegistry
from dco.config import RuntimeConfig
from dco.directive_store import DirectiveStore
from dco.errors import UnknownDirectiveError
from dco.llm_client import MockBackend
from dco.orchestrator import BlockStore, GeneratedBlock, Orchestrator

from conftest import OPEN_FILE_REPLY, make_directive

SUM_REPLY = "```python\ndef sum_pair(a, b):\n    return a + b\n```"


def make_orchestrator(backend, tmp_path=None, directives=(), config=None):
    store = DirectiveStore({d.id: d for d in directives}) if directives else None
    block_store = BlockStore(tmp_path / "blocks.jsonl") if tmp_path else None
    return Orchestrator(
        store, backend, FunctionRegistry(),
        config or RuntimeConfig(), block_store,
    )


def test_cache_key_stable_and_version_free(config):
    orch = make_orchestrator(MockBackend(default="x"))
    d1 = make_directive(text="Open the file.")
    d2 = make_directive(text="Open the file.")
    assert orch.cache_key(d1) == orch.cache_key(d2)
    assert len(orch.cache_key(d1)) == 64


def test_cache_key_changes_with_text():
    orch = make_orchestrator(MockBackend(default="x"))
    base = make_directive(text="Open the file.")
    edited = make_directive(
        text="Open the file. If there is already content in the text area - warn the user!"
    )
    assert orch.cache_key(base) != orch.cache_key(edited)


def test_generate_ready_block():
    backend = MockBackend(scripts={"open_file": f"```\n{OPEN_FILE_REPLY}\n```"})
    orch = make_orchestrator(backend)
    block = orch.generate_block(make_directive())
    assert block.status == "ready"
    assert block.failure is None
    assert orch.registry.resolve("onOpenDynamic") is not None
    assert block.source == OPEN_FILE_REPLY


def test_generate_prose_reply_fails_at_extract():
    backend = MockBackend(scripts={"open_file": "I cannot write code today."})
    orch = make_orchestrator(backend)
    block = orch.generate_block(make_directive())
    assert block.status == "failed"
    assert block.failure.category == "ExtractionFailure"
    assert block.failure.stage == "extract"
    assert block.source == ""


def test_forbidden_import_fails_at_guard_before_compile():
    # Source is also syntactically broken: the guard must report first.
    reply = "```\nimport requests\ndef onOpenDynamic(self:\n    pass\n```"
    backend = MockBackend(scripts={"open_file": reply})
    orch = make_orchestrator(backend)
    block = orch.generate_block(make_directive())
    assert block.failure.category == "DisallowedImport"
    assert block.failure.stage == "guard"


def test_compile_failure_stage():
    backend = MockBackend(scripts={"open_file": "```\ndef broken(:\n```"})
    block = make_orchestrator(backend).generate_block(make_directive())
    assert block.failure.category == "CompileError"
    assert block.failure.stage == "compile"


def test_wrong_entry_point_is_missing_entry_point():
    backend = MockBackend(scripts={"open_file": "```\ndef somethingElse():\n    pass\n```"})
    block = make_orchestrator(backend).generate_block(make_directive())
    assert block.failure.category == "MissingEntryPoint"
    assert "onOpenDynamic" in block.failure.detail


def test_top_level_crash_is_runtime_error_at_register():
    backend = MockBackend(scripts={"open_file": "```\n1 / 0\ndef onOpenDynamic(self):\n    pass\n```"})
    block = make_orchestrator(backend).generate_block(make_directive())
    assert block.failure.category == "RuntimeError"
    assert block.failure.stage == "register"


def test_backend_error_recorded():
    backend = MockBackend()  # no scripts, no default
    block = make_orchestrator(backend).generate_block(make_directive())
    assert block.failure.category == "BackendError"
    assert block.failure.stage == "generate"


def test_invoke_action_cached_reuses_block(tmp_path):
    directive = make_directive(
        directive_id="sum_pair", entry_point="sum_pair",
        text="Create sum_pair.", cache="cached",
    )
    backend = MockBackend(scripts={"sum_pair": SUM_REPLY})
    orch = make_orchestrator(backend, tmp_path, [directive])
    for _ in range(10):
        result = orch.invoke_action("sum_pair", [2, 3])
        assert result.ok and result.outcome.value == 5
    assert backend.calls == 1


def test_invoke_action_ephemeral_always_regenerates(tmp_path):
    directive = make_directive(
        directive_id="sum_pair", entry_point="sum_pair",
        text="Create sum_pair.", cache="ephemeral",
    )
    backend = MockBackend(scripts={"sum_pair": SUM_REPLY})
    orch = make_orchestrator(backend, tmp_path, [directive])
    for _ in range(10):
        assert orch.invoke_action("sum_pair", [1, 1]).ok
    assert backend.calls == 10


def test_edit_liveness(tmp_path):
    directive = make_directive(
        directive_id="sum_pair", entry_point="sum_pair",
        text="Create sum_pair.", cache="cached",
    )
    v2_reply = "```python\ndef sum_pair(a, b):\n    total = a + b\n    return total\n```"
    backend = MockBackend(scripts={"sum_pair": [SUM_REPLY, v2_reply]})
    orch = make_orchestrator(backend, tmp_path, [directive])

    first = orch.invoke_action("sum_pair", [2, 2])
    assert backend.calls == 1
    orch.store.update_text("sum_pair", "Create sum_pair. Compute carefully.")
    second = orch.invoke_action("sum_pair", [2, 2])
    assert backend.calls == 2
    assert first.block.source_hash != second.block.source_hash
    assert second.ok


def test_failed_generation_blocks_invocation(tmp_path):
    directive = make_directive(
        directive_id="sum_pair", entry_point="sum_pair", text="Create sum_pair.",
    )
    backend = MockBackend(scripts={"sum_pair": "no code here"})
    orch = make_orchestrator(backend, tmp_path, [directive])
    result = orch.invoke_action("sum_pair", [1, 2])
    assert result.outcome is None
    assert result.block.failure.category == "ExtractionFailure"


def test_failed_blocks_not_negatively_cached(tmp_path):
    directive = make_directive(
        directive_id="sum_pair", entry_point="sum_pair", text="Create sum_pair.",
    )
    backend = MockBackend(scripts={"sum_pair": ["prose only", SUM_REPLY]})
    orch = make_orchestrator(backend, tmp_path, [directive])
    assert orch.invoke_action("sum_pair", [1, 2]).outcome is None
    retry = orch.invoke_action("sum_pair", [1, 2])  # retried on next invoke
    assert retry.ok
    assert backend.calls == 2


def test_unknown_directive_raises(tmp_path):
    orch = make_orchestrator(MockBackend(default="x"), tmp_path, [make_directive()])
    with pytest.raises(UnknownDirectiveError):
        orch.invoke_action("missing_id")


def test_single_flight_generation(tmp_path):
    directive = make_directive(
        directive_id="sum_pair", entry_point="sum_pair",
        text="Create sum_pair.", cache="cached",
    )
    backend = MockBackend(scripts={"sum_pair": SUM_REPLY}, delay_s=0.15)
    orch = make_orchestrator(backend, tmp_path, [directive])
    results = []

    def invoke():
        results.append(orch.invoke_action("sum_pair", [3, 4]))

    threads = [threading.Thread(target=invoke) for _ in range(6)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert backend.calls == 1
    assert all(r.ok and r.outcome.value == 7 for r in results)


def test_block_store_persists_jsonl(tmp_path):
    backend = MockBackend(scripts={"open_file": f"```\n{OPEN_FILE_REPLY}\n```"})
    orch = make_orchestrator(backend, tmp_path)
    orch.generate_block(make_directive())
    lines = (tmp_path / "blocks.jsonl").read_text().strip().split("\n")
    assert len(lines) == 1
    record = json.loads(lines[0])
    assert record["status"] == "ready"
    assert record["directive_id"] == "open_file"
    assert record["created_at"].endswith("Z")
    assert GeneratedBlock.from_json(record).source == OPEN_FILE_REPLY


def test_raw_response_dropped_when_configured(tmp_path):
    backend = MockBackend(scripts={"open_file": f"```\n{OPEN_FILE_REPLY}\n```"})
    config = RuntimeConfig(store_raw_response=False)
    orch = make_orchestrator(backend, tmp_path, config=config)
    block = orch.generate_block(make_directive())
    assert block.raw_response == ""
    assert block.source == OPEN_FILE_REPLY


def test_purge_all(tmp_path):
    backend = MockBackend(scripts={"open_file": f"```\n{OPEN_FILE_REPLY}\n```"},
                          default="no code")
    orch = make_orchestrator(backend, tmp_path)
    for _ in range(3):
        orch.generate_block(make_directive(cache="ephemeral"))
    assert orch.purge_blocks("all") == 3
    assert orch.block_store.records() == []
    assert (tmp_path / "blocks.jsonl").read_text() == ""


def test_purge_failed_only(tmp_path):
    ready_reply = f"```\n{OPEN_FILE_REPLY}\n```"
    backend = MockBackend(scripts={"open_file": [ready_reply, ready_reply, "prose"]})
    orch = make_orchestrator(backend, tmp_path)
    orch.generate_block(make_directive(text="One."))
    orch.generate_block(make_directive(text="Two."))
    failed = orch.generate_block(make_directive(text="Three."))
    assert failed.status == "failed"
    assert orch.purge_blocks("failed_only") == 1
    statuses = {b.status for b in orch.block_store.records()}
    assert statuses == {"ready"}


def test_purge_older_than_zero_takes_everything(tmp_path):
    backend = MockBackend(scripts={"open_file": f"```\n{OPEN_FILE_REPLY}\n```"})
    orch = make_orchestrator(backend, tmp_path)
    orch.generate_block(make_directive())
    assert orch.purge_blocks("older_than", 0) == 1


def test_purge_clears_reuse_but_not_registry(tmp_path):
    directive = make_directive(
        directive_id="sum_pair", entry_point="sum_pair",
        text="Create sum_pair.", cache="cached",
    )
    backend = MockBackend(scripts={"sum_pair": SUM_REPLY})
    orch = make_orchestrator(backend, tmp_path, [directive])
    orch.invoke_action("sum_pair", [1, 1])
    assert orch.purge_blocks("all") == 1
    # registry handle survives purge
    assert orch.registry.resolve("sum_pair")(2, 2) == 4
    # next invoke regenerates
    orch.invoke_action("sum_pair", [1, 1])
    assert backend.calls == 2


def test_stage_is_earliest_failure():
    # Reply is prose AND (were it extracted) would also be uncompilable:
    # extract reports first.
    backend = MockBackend(scripts={"open_file": "thoughts about def ("})
    block = make_orchestrator(backend).generate_block(make_directive())
    assert block.failure.stage == "extract"
