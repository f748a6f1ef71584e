"""Domain error hierarchy.

Every error carries a stable ``code`` (the class name) which travels verbatim
through the HTTP layer and the CLI, so callers can match on it without
parsing messages.
"""

from __future__ import annotations


class BankflowError(Exception):
    """Base class for all domain errors."""

    @property
    def code(self) -> str:
        return type(self).__name__


class InvalidRequest(BankflowError):
    """A service request violates one of its invariants."""

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


class UnknownKind(BankflowError):
    """No chain is configured for the request kind."""


class UnknownRequest(BankflowError):
    """No request with this id exists."""


class UnknownTier(BankflowError):
    """The tier id is not part of the relevant chain configuration."""


class NotCurrentTier(BankflowError):
    """A decision was attempted from a tier that is not the request's current tier."""


class TerminalState(BankflowError):
    """The request was already approved or rejected; no further decisions are accepted."""


class AuthorityExceeded(BankflowError):
    """Approval was attempted for an amount above the tier's authority limit."""


class NoNextTier(BankflowError):
    """Escalation was attempted at the final tier of the chain."""


class InvalidTopic(BankflowError):
    """Subscription topic is empty or malformed."""


class InvalidChannel(BankflowError):
    """Not one of the supported notification channels."""


class UnknownSubscription(BankflowError):
    """No subscription with this id exists."""


class InvalidEvent(BankflowError):
    """A published event is malformed or uses a reserved topic."""


class UnknownChannelSink(BankflowError):
    """A queued delivery references a channel with no registered sink."""


class StorageFailure(BankflowError):
    """The event log could not be written durably."""


class CorruptLog(BankflowError):
    """The event log failed to parse or replay.

    ``line`` is the 1-based line number of the offending record.
    """

    def __init__(self, line: int, reason: str):
        super().__init__(f"line {line}: {reason}")
        self.line = line
        self.reason = reason


class ParseError(BankflowError):
    """A catalog file is not a JSON array of objects."""


class SchemaError(BankflowError):
    """One or more catalog entries are missing required elements.

    ``problems`` maps an entry label to the list of offending fields.
    """

    def __init__(self, problems: dict[str, list[str]]):
        detail = "; ".join(f"{name}: {', '.join(fields)}" for name, fields in problems.items())
        super().__init__(detail)
        self.problems = problems


class ConfigError(BankflowError):
    """A configuration document violates the chain or token schema.

    ``diagnostics`` is a list of human-readable ``path: reason`` strings.
    """

    def __init__(self, diagnostics: list[str]):
        super().__init__("; ".join(diagnostics))
        self.diagnostics = diagnostics
