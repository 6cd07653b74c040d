"""Exception types shared across the package.

The CLI maps these onto exit codes: validation/data problems exit 2,
numerical failures exit 3.
"""


class ValidationError(ValueError):
    """Input data or file content violates a documented invariant."""


class NumericalError(ArithmeticError):
    """A computation produced non-finite values (training divergence etc.)."""
