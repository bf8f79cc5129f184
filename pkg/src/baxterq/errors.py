"""Exception and warning types shared across the package."""


class BaxterError(Exception):
    """Base class for all errors raised by baxterq."""


class GammaPoleError(BaxterError, ValueError):
    """Gamma function evaluated at a non-positive integer."""


class ConvergenceDomainError(BaxterError, ValueError):
    """Spectral parameter outside the half-plane where an integral converges."""


class SingularMatrixError(BaxterError, ValueError):
    pass


class ShapeError(BaxterError, ValueError):
    pass


class QuadratureError(BaxterError, RuntimeError):
    """Successive refinements did not agree within the tolerance budget."""


class StepTooLargeError(BaxterError, RuntimeError):
    pass


class GridBudgetError(BaxterError, MemoryError):
    pass


class DegenerateWeightWarning(RuntimeWarning):
    """Most of the Monte Carlo weight mass sits in a handful of samples."""
