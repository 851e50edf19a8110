"""Dynamic code orchestration: written directives become ephemeral executable
code blocks through an LLM backend, registered as live functions and invoked
under sandbox guards."""

__version__ = "0.1.0"
