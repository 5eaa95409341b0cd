"""Exception hierarchy shared across the toolkit.

The CLI maps these onto exit codes: validation problems exit 2, I/O
problems exit 3 and numeric failures exit 4.
"""


class KSamplerError(Exception):
    pass


class ValidationError(KSamplerError, ValueError):
    """Bad argument values or violated preconditions."""


class DimensionError(ValidationError):
    """Shape or size mismatch between operands."""


class NumericError(KSamplerError, ArithmeticError):
    """Non-finite values or a numerically failed solve."""


class CombinatorialGuardError(ValidationError):
    """Refused a search whose enumeration size exceeds the guard."""


class GraphError(KSamplerError, RuntimeError):
    """Misuse of the autodiff tape (e.g. backward called twice)."""
