"""Exception types shared across the package.

The CLI maps several of these to dedicated exit codes, so they are kept
distinct rather than folded into ``ValueError``.
"""


class CohqError(Exception):
    """Base class for all package errors."""


class ConfigError(CohqError, ValueError):
    """Invalid configuration: bad cutoff, margin, tolerance or field value."""

    def __init__(self, message, field=None):
        self.field = field
        if field is not None:
            message = f"{field}: {message}"
        super().__init__(message)


class UsageError(CohqError, ValueError):
    """An operation was called outside its preconditions."""


class SpaceMismatchError(UsageError):
    """Operands live on different Fock spaces."""


class DomainError(CohqError, ValueError):
    """A chart or coset parameter outside the domain of a map."""


class NoPhysicalStates(CohqError):
    """The constraint admits no physical states for the given R^2.

    For the oscillator-sum constraint the kernel of the constraint operator
    is non-empty only when R^2/(2 hbar) - 1 is a non-negative integer.
    """


class UnsupportedModel(CohqError):
    """The requested operation is refused for this model."""


class UnsupportedRepresentation(CohqError):
    """The representation has no (strong) resolution of identity."""


class TruncationTooSmall(CohqError):
    """The Fock truncation cannot hold the requested state to tolerance."""

    def __init__(self, message, required_cutoff=None):
        self.required_cutoff = required_cutoff
        if required_cutoff is not None:
            message = f"{message} (minimal cutoff N={required_cutoff})"
        super().__init__(message)


class NotPhysical(CohqError):
    """A state has vanishing physical norm."""
