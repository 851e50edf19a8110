from __future__ import annotations

import itertools
import json

from hypothesis import given, settings
from hypothesis import strategies as st

from dco.response_parser import extract_code

from conftest import OPEN_FILE_REPLY


# ---------------------------------------------------------------------------
# Reference matcher: quadratic brute force over fence-line indices, kept
# deliberately independent of the linear parser it checks.
# ---------------------------------------------------------------------------

def reference_first_block(text: str) -> str | None:
    lines = text.replace("\r\n", "\n").replace("\r", "\n").split("\n")
    fence_positions = [i for i, line in enumerate(lines) if line.startswith("```")]
    # Fences pair off strictly in sequence: 1st/2nd, 3rd/4th, ...
    blocks = []
    for pair_start in range(0, len(fence_positions) - 1, 2):
        open_at = fence_positions[pair_start]
        close_at = fence_positions[pair_start + 1]
        blocks.append("\n".join(lines[open_at + 1:close_at]))
    for body in blocks:
        if body.strip():
            return body
    return None


def test_prose_wrapped_block():
    reply = "Here is the code:\n```\ndef onOpenDynamic(self):\n    ...\n```\nThis opens a file."
    assert extract_code(reply).source == "def onOpenDynamic(self):\n    ..."


def test_language_tag_stripped():
    reply = "```python\ndef add(a,b):\n    return a+b\n```"
    assert extract_code(reply).source == "def add(a,b):\n    return a+b"


def test_prose_only_reply():
    result = extract_code("I cannot help with that.")
    assert not result.ok
    assert result.failure.category == "ExtractionFailure"
    assert result.failure.stage == "extract"
    assert result.failure.detail == "no fence, no envelope, no definition keyword"


def test_unterminated_fence():
    result = extract_code("```python\ndef broken():\n    pass")
    assert not result.ok
    assert result.failure.detail == "unterminated fence"


def test_editor_reply_extracts():
    reply = f"```\n{OPEN_FILE_REPLY}\n```"
    assert extract_code(reply).source == OPEN_FILE_REPLY


def test_json_envelope():
    reply = json.dumps({"code": "def add(a, b):\n    return a + b"})
    result = extract_code(reply, "json_envelope")
    assert result.source == "def add(a, b):\n    return a + b"


def test_envelope_parse_failure_falls_through_to_fence():
    reply = 'not json {"code": ...\n```\ndef f():\n    return 1\n```'
    assert extract_code(reply, "json_envelope").source == "def f():\n    return 1"


def test_fenced_contract_still_reads_envelopes():
    reply = json.dumps({"code": "def g():\n    return 2"})
    assert extract_code(reply, "fenced").source == "def g():\n    return 2"


def test_bare_source_fallback():
    source = "def add(a, b):\n    return a + b"
    assert extract_code(source).source == source


def test_bare_async_def():
    source = "async def fetch(url):\n    return url"
    assert extract_code(source).source == source


def test_crlf_normalized():
    reply = "```\r\ndef f():\r\n    pass\r\n```"
    assert extract_code(reply).source == "def f():\n    pass"


def test_midline_backticks_are_prose():
    reply = "Use ``` to fence code, like so: ```python\ndef f(): pass\n```"
    # The only line-start fence is the closing one; no complete block exists.
    result = extract_code(reply)
    assert not result.ok


def test_empty_reply():
    assert not extract_code("").ok


# Exhaustive fence-state sweep: every reply of up to 4 tokens drawn from
# {prose, fence, code} must agree with the brute-force reference.
TOKENS = {
    "prose": "Some explanation text.",
    "fence": "```",
    "code": "    x = compute()",
}


def test_exhaustive_fence_states_match_reference():
    names = list(TOKENS)
    checked = 0
    for length in range(0, 5):
        for combo in itertools.product(names, repeat=length):
            reply = "\n".join(TOKENS[name] for name in combo)
            expected = reference_first_block(reply)
            result = extract_code(reply)
            if expected is not None:
                assert result.ok and result.source == expected, combo
            else:
                # Without a complete fenced block the cascade may still accept
                # the reply another way; it must never invent a fenced body.
                if result.ok:
                    assert reference_first_block(reply) is None
            checked += 1
    assert checked == 3**0 + 3**1 + 3**2 + 3**3 + 3**4


source_lines = st.lists(
    st.text(
        alphabet=st.characters(blacklist_categories=("Cs",), blacklist_characters="\r\n"),
        max_size=30,
    ).filter(lambda line: not line.startswith("```")),
    min_size=1,
    max_size=8,
).map("\n".join).filter(lambda s: s.strip())


@settings(max_examples=200)
@given(source=source_lines)
def test_fence_round_trip(source):
    wrapped = f"```\n{source}\n```"
    assert extract_code(wrapped).source == source.replace("\r\n", "\n").replace("\r", "\n")


@settings(max_examples=100)
@given(first=source_lines, second=source_lines)
def test_first_of_two_blocks_wins(first, second):
    reply = f"intro\n```\n{first}\n```\nmiddle\n```\n{second}\n```\nend"
    assert extract_code(reply).source == first


@settings(max_examples=100)
@given(body=source_lines)
def test_extraction_idempotent_on_definitions(body):
    source = "def generated():\n" + "\n".join(
        "    " + line for line in body.split("\n")
    )
    extracted = extract_code(source).source
    assert extracted == source.strip()
