"""Exception types shared across the package."""


class DcoError(Exception):
    """Base class for all package errors."""


class UnknownDirectiveError(DcoError):
    def __init__(self, directive_id: str):
        super().__init__(f"unknown directive: {directive_id!r}")
        self.directive_id = directive_id


class DuplicateIdError(DcoError):
    def __init__(self, directive_id: str):
        super().__init__(f"duplicate directive id: {directive_id!r}")
        self.directive_id = directive_id


class EmptyTextError(DcoError):
    def __init__(self, directive_id: str = ""):
        super().__init__("directive text is empty after trimming")
        self.directive_id = directive_id


class DirectivesParseError(DcoError):
    """A directives or corpus file entry could not be parsed."""

    def __init__(self, line: int, reason: str):
        super().__init__(f"line {line}: {reason}")
        self.line = line
        self.reason = reason


class MissingPlaceholderError(DcoError):
    def __init__(self):
        super().__init__("system template lacks the {CONTEXT} placeholder")


class BackendFailure(DcoError):
    """Base for completion-backend errors; generation maps these to BackendError records."""


class NetworkError(BackendFailure):
    pass


class AuthError(BackendFailure):
    pass


class BackendTimeoutError(BackendFailure):
    """The completion request itself timed out (distinct from the sandbox invocation timeout)."""


class MissingFixtureError(BackendFailure):
    def __init__(self, request_key: str):
        super().__init__(f"no fixture recorded for key {request_key}")
        self.request_key = request_key


class CompileBlockError(DcoError):
    """Extracted source failed to compile."""

    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line
        self.message = message


class BlockExecutionError(DcoError):
    """A block's top-level execution raised before any name was bound."""


class NoFunctionsDefinedError(DcoError):
    def __init__(self):
        super().__init__("no functions defined")


class MissingEntryPointError(DcoError):
    def __init__(self, name: str, reason: str = "not registered"):
        super().__init__(f"entry point {name!r} {reason}")
        self.name = name
