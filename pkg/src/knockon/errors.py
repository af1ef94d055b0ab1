"""Exception types shared across the package."""

from __future__ import annotations


class KnockonError(Exception):
    """Base class for all errors raised by this package."""


class InvalidParameterError(KnockonError, ValueError):
    """An argument violates a documented precondition."""


class NoInterbankMarketError(KnockonError):
    """The topology has no edges, so no loan amounts can be assigned."""


class InfeasibleBalanceError(KnockonError):
    """Total external assets cannot cover the net-borrower top-ups."""


class ParseError(KnockonError):
    """An input file (config or edge list) could not be parsed."""


class ConfigError(ParseError):
    """A scenario config file is missing, malformed, or violates a bound."""


class ReplicationError(KnockonError):
    """A Monte Carlo replication failed; carries the failing stream index."""

    def __init__(self, stream_index: int, detail: str):
        super().__init__(f"replication stream {stream_index}: {detail}")
        self.stream_index = stream_index
        self.detail = detail

    def __reduce__(self):
        return (type(self), (self.stream_index, self.detail))
