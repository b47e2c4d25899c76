"""Exception types raised by the library."""


class NHResponseError(Exception):
    """Base class for all library-specific errors."""


class NonFiniteError(NHResponseError, ValueError):
    """Input contains NaN or Inf entries."""


class ExceptionalPointError(NHResponseError):
    """Eigenvectors (numerically) coalesce; biorthogonal decomposition fails."""

    def __init__(self, condition, cond_max):
        self.condition = condition
        self.cond_max = cond_max
        super().__init__(
            f"eigenvector matrix condition number {condition:.3e} exceeds "
            f"{cond_max:.1e}: eigenvectors coalesce (exceptional point)"
        )


class ComplexSpectrumError(NHResponseError):
    """A real spectrum is required but complex eigenvalues were found."""


class NotPositiveDefiniteError(NHResponseError):
    """The candidate metric is not positive definite."""


class NotHermitianError(NHResponseError):
    """A matrix expected to be Hermitian is not, beyond tolerance."""


class SingularMatrixError(NHResponseError):
    """Resolvent evaluated exactly at a real pole."""

    def __init__(self, omega, pole):
        self.omega = omega
        self.pole = pole
        super().__init__(f"omega = {omega} coincides with pole at {pole}")


class MissingMetricError(NHResponseError):
    """An operation in the PHQM framework was called without a pseudo-metric."""


class StabilityError(NHResponseError):
    """Framework constraint violated (e.g. non-negative decay spectrum)."""


class DegenerateSpectrumError(NHResponseError):
    """Spectral projectors are ill-conditioned due to (near-)degeneracy."""


class BranchAmbiguityError(NHResponseError):
    """A pole sits on the branch cut of the principal logarithm."""


class DegenerateSelectionError(NHResponseError):
    """Ground-state selection rule cannot break a tie."""


class DomainError(NHResponseError, ValueError):
    """Argument outside the mathematical domain of the function."""


class InsufficientGridError(NHResponseError):
    """Sample grid too narrow or too coarse for the requested transform."""


class RegimeError(NHResponseError):
    """Model parameters outside the regime where a formula is valid."""


class ConfigError(NHResponseError):
    """Invalid run configuration (CLI exit code 2)."""
