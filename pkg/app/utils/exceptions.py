from typing import Optional


class PinnError(Exception):
    """Base class for errors raised by the solver."""


class ConfigurationError(PinnError, ValueError):
    """Invalid or inconsistent configuration (shapes, frequencies, strategy pairings)."""


class TrainingError(PinnError, RuntimeError):
    """A loss or residual became non-finite during evaluation."""

    def __init__(self, message: str, batch_id: Optional[int] = None, point_index: Optional[int] = None):
        super().__init__(message)
        self.batch_id = batch_id
        self.point_index = point_index


class NumericError(PinnError, ArithmeticError):
    """Quadrature non-convergence or a degenerate normalisation."""

    def __init__(self, message: str, index: Optional[int] = None):
        super().__init__(message)
        self.index = index
