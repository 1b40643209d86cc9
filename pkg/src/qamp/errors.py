"""Exception hierarchy shared by the library and the CLI."""


class QampError(Exception):
    """Base class for all library errors."""


class ContractViolation(QampError, ValueError):
    """An input violates an operation's precondition (dimension, Hamming distance, ...)."""


class DomainError(QampError, ValueError):
    """A numeric parameter lies outside the domain where the construction is defined."""


class NotUnitaryError(ContractViolation):
    """An operator failed the unitarity check."""


class ZeroCouplingError(QampError, ValueError):
    """The start state has no amplitude to reach the target; amplification is undefined."""


class ResourceLimitError(QampError, RuntimeError):
    """A requested dimension exceeds a configured cap."""


class DataFormatError(QampError, ValueError):
    """A values file or circuit description could not be parsed."""
