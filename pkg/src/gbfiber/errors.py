"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the supported domain of a routine."""


class SolverError(RuntimeError):
    """A root finder or mode solver could not produce a valid result."""


class QuadratureError(RuntimeError):
    """Adaptive quadrature did not reach the requested tolerance."""

    def __init__(self, message: str, achieved: float):
        super().__init__(f"{message} (achieved abs. error {achieved:.3e})")
        self.achieved = achieved


class IntegrityError(RuntimeError):
    """A quantity that must be positive (or otherwise constrained) was not."""


class CapacityError(ValueError):
    """A Fock-space operation would exceed the occupation cap."""
