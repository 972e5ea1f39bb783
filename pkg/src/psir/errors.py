"""Shared exception types."""


class NumericError(RuntimeError):
    """Raised when a numerical routine fails (blow-up, step cap, non-convergence)."""
