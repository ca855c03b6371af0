"""Exception types raised by the library."""


class SymwaveError(Exception):
    """Base class for all library errors."""


class ParameterError(SymwaveError, ValueError):
    """An argument violates an operation's preconditions."""


class NoSupportError(SymwaveError):
    """A vote profile carries no detectable rise/fall pair."""


class GroundTruthError(SymwaveError, ValueError):
    """A ground-truth file could not be parsed."""
