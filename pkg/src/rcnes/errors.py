"""Exceptions shared across the optimizer core."""


class NumericalError(FloatingPointError):
    """Raised when optimizer state overflows or turns non-finite."""


class AskTellOrderError(RuntimeError):
    """Raised when ask/tell are not called in strict alternation."""
