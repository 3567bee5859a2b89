"""Exception types shared across the package."""

from __future__ import annotations


class GraphTalkError(Exception):
    """Base class for all domain errors raised by this package."""


class CypherSyntaxError(GraphTalkError):
    """Query text does not conform to the supported grammar."""

    def __init__(self, message: str, line: int, column: int, token: str = ""):
        self.line = line
        self.column = column
        self.token = token
        super().__init__(f"{message} (line {line}, column {column})")


class UnsupportedFeature(CypherSyntaxError):
    """Syntactically valid Cypher outside the supported subset."""


class UnknownVariable(GraphTalkError):
    """An expression references a variable no pattern or WITH binds."""

    def __init__(self, name: str):
        self.name = name
        super().__init__(f"unknown variable: {name}")


class SchemaError(GraphTalkError):
    """Schema file cannot be parsed or violates a schema invariant."""


class GraphFormatError(GraphTalkError):
    """Graph fixture file cannot be parsed."""


class SchemaViolation(GraphTalkError):
    """Graph fixture contains an edge its declared schema does not allow."""


class ExecutionError(GraphTalkError):
    """Query evaluation failed (type error, unresolvable reference, ...)."""


class RemoteQueryError(GraphTalkError):
    """Remote engine rejected the submitted query."""


class MissingSlot(GraphTalkError):
    """A prompt template placeholder was left unfilled."""


class EmptyAfterCleaning(GraphTalkError):
    """Model output contained nothing query-like."""


class ProviderError(GraphTalkError):
    """Transport or HTTP failure while talking to a model provider."""


class ReplayMiss(GraphTalkError):
    """Replay transcript has no recorded response for a prompt."""

    def __init__(self, fingerprint: str):
        self.fingerprint = fingerprint
        super().__init__(f"no recorded exchange for prompt fingerprint {fingerprint}")


class TranscriptError(GraphTalkError):
    """Transcript file is malformed or violates its invariants."""


class BudgetExhausted(GraphTalkError):
    """The per-question amendment budget has been used up."""


class StatsDomainError(GraphTalkError):
    """Statistical routine called with out-of-domain counts."""


class BenchmarkError(GraphTalkError):
    """Benchmark generation preconditions not met."""


class ConfigError(GraphTalkError):
    """Service configuration is missing or inconsistent."""
