"""Exception hierarchy shared by the library and the command line."""


class KPTropError(Exception):
    """Base class for every error raised by this package."""

    exit_code = 1


class InvalidInput(KPTropError, ValueError):
    """Malformed or out-of-range user input."""

    exit_code = 1


class ConfigError(InvalidInput):
    """A configuration violates one or more invariants.

    ``problems`` lists every violation, not just the first one found.
    """

    def __init__(self, problems):
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))


class DegenerateEvent(KPTropError):
    """The requested event is not generic (two or more critical values tie)."""

    exit_code = 1

    def __init__(self, message, ties=()):
        super().__init__(message)
        self.ties = tuple(ties)


class ConsistencyError(KPTropError):
    """Two independent computation routes disagree.

    This signals a bug, never a property of the input.
    """

    exit_code = 2


class ResourceGuard(KPTropError):
    """A requested enumeration exceeds the configured size bound."""

    exit_code = 3
