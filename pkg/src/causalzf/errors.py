"""Exception hierarchy for causalzf."""


class CausalZFError(Exception):
    """Base class for all library errors."""


class MalformedInputError(CausalZFError, ValueError):
    """Coefficient data or a document does not have the required shape."""

    def __init__(self, message, field=None):
        super().__init__(message)
        self.field = field


class InvalidScaleError(CausalZFError, ValueError):
    """Scale factor is not a positive finite real."""


class DimensionMismatchError(CausalZFError, ValueError):
    """Channel and precoder dimensions are incompatible."""


class NotRightInvertibleError(CausalZFError):
    """Channel has more outputs than inputs, so no right inverse exists."""


class NumericalFailureError(CausalZFError):
    """An SVD or eigendecomposition did not converge."""

    def __init__(self, message, N=None):
        super().__init__(message)
        self.N = N


class MonotonicityError(CausalZFError):
    """A finite-section sequence broke its proven monotonicity."""


class NotPositiveKernelError(CausalZFError):
    """Kernel Gram matrix has a negative eigenvalue beyond tolerance.

    Raised when gamma is below the optimal norm, or numerically too close.
    """

    def __init__(self, message, min_eigenvalue=None):
        super().__init__(message)
        self.min_eigenvalue = min_eigenvalue


class InconsistentIsometryError(CausalZFError):
    """Generator Gram matrices of domain and range disagree."""


class ContractionViolationError(CausalZFError):
    """Colligation operator norm exceeds one beyond tolerance."""


class RealizationError(CausalZFError):
    """``I - z A*`` is numerically singular at an evaluation point."""
