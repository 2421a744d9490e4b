"""Shared exception types.

Parse-type errors subclass ValueError and live next to their parsers;
everything here is a runtime/domain failure.
"""


class TransfiniteAFError(Exception):
    """Base class for domain errors raised by this package."""


class DomainError(TransfiniteAFError):
    """A documented precondition of an operation was violated."""


class CapExceeded(TransfiniteAFError):
    """A node/state/closure cap was hit before the computation finished."""


class UnsupportedExpression(TransfiniteAFError):
    """A symbolic quantity falls outside the supported affine fragment."""


class IncompleteStageMap(TransfiniteAFError):
    """A candidate stage map has no value for a required argument."""


class ClosureError(TransfiniteAFError):
    """Attacker closure could not be computed for a window.

    Carries the argument whose attackers forced the breach.
    """

    def __init__(self, message: str, argument: int):
        super().__init__(message)
        self.argument = argument
