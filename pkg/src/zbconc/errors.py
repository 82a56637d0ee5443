"""Exception hierarchy shared by all modules.

The CLI maps these onto exit codes: domain errors exit 2, resource
errors exit 3.
"""


class DomainError(ValueError):
    """An input violates a documented precondition."""


class UnsupportedError(DomainError):
    """The request is well formed but no constant is known for it."""


class ResourceError(RuntimeError):
    """An enumeration or convolution would exceed its configured cap."""


class ConsistencyError(ArithmeticError):
    """Two independent evaluations of the same quantity disagree."""
