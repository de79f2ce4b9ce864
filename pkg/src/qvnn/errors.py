"""Exception types shared across the package."""


class QvnnError(Exception):
    """Base class for all package-specific errors."""


class ShapeError(QvnnError, ValueError):
    """Operands have incompatible dimensions."""


class StructureError(QvnnError, ValueError):
    """A matrix violates a required structure (Hermitian, skew, ...) beyond tolerance."""


class InputError(QvnnError, ValueError):
    """A config file, matrix payload, or parameter set fails validation."""


class CoverageError(QvnnError, ValueError):
    """A time lookup or functional evaluation falls outside the stored sample range."""


class DivergenceError(QvnnError, RuntimeError):
    """A simulated state became non-finite.

    Attributes
    ----------
    time : float
        First time at which a non-finite component appeared.
    """

    def __init__(self, message: str, time: float):
        super().__init__(message)
        self.time = time


class EquilibriumError(QvnnError, RuntimeError):
    """The damped fixed-point iteration for the network equilibrium did not converge."""


class NumericalError(QvnnError, RuntimeError):
    """A solver or factorization broke down beyond recovery."""
