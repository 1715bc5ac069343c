"""
Exception types raised across the consciousness-prior lab.
"""


class ShapeError(ValueError):
    """Raised when array shapes do not conform to an operation."""


class DomainError(ValueError):
    """Raised when an input lies outside the domain of a primitive (e.g. log of 0)."""


class ConfigError(ValueError):
    """Raised when a config file cannot be parsed or violates an invariant."""


class CheckpointError(ValueError):
    """Raised when a checkpoint file is malformed or truncated."""


class OracleBudgetError(ValueError):
    """Raised when an exact enumeration would exceed the path-count guard."""


class InfeasiblePlacementError(RuntimeError):
    """Raised when reset cannot place piles or distractors."""


class NumericalAbort(RuntimeError):
    """
    Raised when a training step produces a non-finite loss.

    Attributes:
        window (numpy.ndarray): The batch of observation windows that produced the loss.
        step (int): Training step at which the abort happened.
    """

    def __init__(self, message, window=None, step=None):
        super().__init__(message)
        self.window = window
        self.step = step
