from __future__ import annotations

from pathlib import Path

import pytest

from dco.config import RuntimeConfig
from dco.directive_store import Directive, GenerationPolicy

REPO = Path(__file__).resolve().parent.parent

OPEN_FILE_REPLY = """def onOpenDynamic(self):
    from tkinter import filedialog
    filename = filedialog.askopenfilename(initialdir = "/",title = "Select file",filetypes = (("Text files","*.txt"),("all files","*.*")))
    self.text.delete('1.0', END)
    with open(filename, 'r') as f:
        self.text.insert(END, f.read())"""

WARNING_SENTENCE = "If there is already content in the text area - warn the user!"


@pytest.fixture
def config():
    return RuntimeConfig(model_id="gpt-3.5-turbo")


def make_directive(
    directive_id: str = "open_file",
    entry_point: str = "onOpenDynamic",
    text: str = "Create a single function named onOpenDynamic.",
    **policy_kwargs,
) -> Directive:
    return Directive(
        id=directive_id,
        entry_point=entry_point,
        text=text,
        context_sources=(),
        policy=GenerationPolicy(**policy_kwargs),
        version=1,
    )


@pytest.fixture
def directives_file(tmp_path):
    import json

    path = tmp_path / "directives.json"
    path.write_text(json.dumps({
        "directives": [
            {
                "id": "open_file",
                "entry_point": "onOpenDynamic",
                "text": "Create a single function named onOpenDynamic. It takes one argument, self.",
                "context_sources": [],
                "policy": {"mode": "deterministic", "cache": "cached", "timeout_ms": 2000},
            },
            {
                "id": "sum_pair",
                "entry_point": "sum_pair",
                "text": "Create a single function named sum_pair taking two numbers and returning their sum.",
                "context_sources": [],
                "policy": {"cache": "ephemeral"},
            },
        ]
    }), encoding="utf-8")
    return path
