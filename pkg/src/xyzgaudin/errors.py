"""Exception types shared across the package."""


class GaudinError(Exception):
    """Base class for all numerical/domain failures in this package."""


class DomainError(GaudinError, ValueError):
    """Parameter outside its mathematical domain (e.g. modulus not in (0,1))."""


class PoleProximityError(GaudinError):
    """Argument within the guard radius of a pole of an elliptic function.

    Carries the offending lattice point so callers can perturb away from it.
    """

    def __init__(self, message, lattice_point=None):
        super().__init__(message)
        self.lattice_point = lattice_point


class SingularCouplingError(GaudinError):
    """Exchange coupling evaluated where sn(z) vanishes."""


class NonHermitianError(GaudinError):
    """Operator required to be Hermitian fails the hermiticity check."""


class NonCommutingError(GaudinError):
    """Operator does not commute with the parity operator within tolerance."""

    def __init__(self, message, commutator_norm=None):
        super().__init__(message)
        self.commutator_norm = commutator_norm


class EigensolverError(GaudinError):
    """Iterative eigensolver failed to converge; carries the residual."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class PoleCollisionError(GaudinError):
    """Newton step could not avoid a pole even at minimal damping."""


class FitDivergenceError(GaudinError):
    """Nonlinear least-squares fit failed to converge."""


class SeedNotFoundError(GaudinError):
    """No multi-start attempt produced a ground-state root pattern."""


class ContinuationError(GaudinError):
    """Continuation step failed even after bisecting the size jump."""

    def __init__(self, message, last_good_n=None):
        super().__init__(message)
        self.last_good_n = last_good_n


class InsufficientPointsError(GaudinError, ValueError):
    """Extrapolation called with fewer data points than the model needs."""


class IncompleteEnumerationWarning(UserWarning):
    """Multi-start enumeration exhausted its budget before the expected count."""

    def __init__(self, message, found=None, expected=None):
        super().__init__(message)
        self.found = found
        self.expected = expected
