"""Exception types shared across the library."""


class SchattenGeoError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(SchattenGeoError, ValueError):
    """Malformed input: bad matrix data, bad configuration, bad file."""


class DimensionMismatchError(ValidationError):
    """Operands live on spaces of different dimension."""


class ExponentError(ValidationError):
    """Schatten exponent outside the open interval (1, inf)."""


class HermitianityError(ValidationError):
    """Matrix fails the Hermitian check beyond tolerance."""


class NotPositiveDefiniteError(ValidationError):
    """Matrix expected to be positive definite is not."""


class DomainError(SchattenGeoError, ValueError):
    """An eigenvalue falls outside the domain of the scalar function.

    Carries the offending eigenvalue in ``args[1]`` when available.
    """

    def __init__(self, message, eigenvalue=None):
        super().__init__(message)
        self.eigenvalue = eigenvalue


class ConditioningError(SchattenGeoError):
    """Matrix is singular or nearly singular for the requested operation."""

    def __init__(self, message, smallest_singular_value=None):
        super().__init__(message)
        self.smallest_singular_value = smallest_singular_value


class ConvergenceError(SchattenGeoError):
    """Iterative scheme exhausted its budget; carries the best iterate."""

    def __init__(self, message, best=None, residual=None):
        super().__init__(message)
        self.best = best
        self.residual = residual


class BudgetError(SchattenGeoError):
    """An enumeration exceeded its configured cap."""


class UnboundedOrbitError(SchattenGeoError):
    """Orbit expansion was truncated while still expanding, and the candidate
    center moves too much under the group: the orbit looks unbounded."""

    def __init__(self, message, displacement=None, orbit_size=None):
        super().__init__(message)
        self.displacement = displacement
        self.orbit_size = orbit_size


class PreconditionError(SchattenGeoError):
    """A documented operation precondition does not hold for the inputs."""
