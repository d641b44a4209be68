"""Exception hierarchy shared by all frilab modules."""


class FriError(Exception):
    """Base class for frilab errors."""


class ConfigError(FriError, ValueError):
    """Invalid or inconsistent configuration (bad periods, budgets, files)."""


class NumericalError(FriError):
    """Base for failures of the numerical machinery (CLI exit code 3)."""


class DegenerateSchemeError(NumericalError):
    """The sampling kernels are linearly dependent (singular Gramian)."""


class NoiseModelError(NumericalError):
    """Noise levels make the Fisher information undefined."""


class UnidentifiableError(NumericalError):
    """The Fisher information matrix is singular.

    Attributes
    ----------
    null_basis : ndarray, shape (K, K - rank)
        Orthonormal basis of the parameter directions that the
        measurements cannot see.
    """

    def __init__(self, message, null_basis=None, rank=None):
        super().__init__(message)
        self.null_basis = null_basis
        self.rank = rank


class SpectralNullError(NumericalError):
    """A used Fourier coefficient of the pulse is (numerically) zero."""

    def __init__(self, message, index):
        super().__init__(message)
        self.index = index


class ConstraintViolationError(NumericalError):
    """A design matrix violates its orthonormality constraint."""


class DiagnosticError(NumericalError):
    """Too many Monte Carlo trials failed to produce an estimate."""
