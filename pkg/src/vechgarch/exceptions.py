"""Exception hierarchy and warning categories used across the package."""


class VechGarchError(Exception):
    """Base class for all errors raised by this package.

    Parameters
    ----------
    message : str
        Human-readable description of the failure.
    stage : str, optional
        Pipeline stage that failed; attached by drivers such as
        :func:`vechgarch.solver.estimate` when they re-raise errors from
        sub-operations.
    """

    def __init__(self, message, stage=None):
        if stage is not None:
            message = f"[{stage}] {message}"
        super().__init__(message)
        self.stage = stage


class InvalidInput(VechGarchError):
    """Malformed input: wrong shape, non-finite values, bad configuration."""


class NumericalFailure(VechGarchError):
    """A numerical routine did not converge or produced an unusable result."""


class SingularMatrix(VechGarchError):
    """A matrix that must be inverted is singular beyond tolerance."""


class SingularLyapunov(VechGarchError):
    """The discrete Lyapunov operator X - B X B' is not invertible."""


class NotPositiveDefinite(VechGarchError):
    """A matrix required to be symmetric positive definite is not."""


class NonStationary(VechGarchError):
    """The autoregressive matrix A + B has spectral radius >= 1."""


class InsufficientData(VechGarchError):
    """Too few observations for the requested computation."""


class UnimodularEigenvalues(VechGarchError):
    """The companion matrix has eigenvalues on (or too close to) the unit
    circle, so no stable/anti-stable eigenvalue split exists."""


class SelectionCountMismatch(VechGarchError):
    """The number of eigenvalues strictly inside the unit circle does not
    match the problem dimension."""


class IllConditionedEigenvectors(VechGarchError):
    """An eigenvector matrix is too ill conditioned to invert reliably."""


class PositivityViolation(VechGarchError):
    """A simulated conditional covariance matrix failed to be positive
    definite.

    Attributes
    ----------
    step : int
        Zero-based index of the offending recursion step, counted from the
        start of the burn-in.
    """

    def __init__(self, message, step=None):
        super().__init__(message)
        self.step = step


class MissingSigmaW(VechGarchError):
    """Flow aggregation with m > 1 requires the noise covariance sigma_w."""


class EstimationWarning(UserWarning):
    """Category for soft repairs (symmetrization, projection, clipping)."""
