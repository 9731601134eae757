"""Shared exception types.

All inherit from ValueError so callers that only care about "bad input"
can catch one base class.
"""


class DimensionError(ValueError):
    """Operand shapes are incompatible for the requested operation."""


class ContractError(ValueError):
    """A documented precondition was violated."""


class FormatError(ValueError):
    """A file does not match its declared binary format."""


class ConsistencyError(ValueError):
    """Two inputs that must agree (e.g. image/label counts) do not."""
