"""Exception types raised across the package."""


class TmsnetError(Exception):
    """Base class for all package errors."""


class DimensionMismatchError(TmsnetError, ValueError):
    pass


class AboveThresholdError(TmsnetError, ValueError):
    """Pump strength at or above the parametric oscillation threshold."""


class DegenerateSteadyStateError(TmsnetError, RuntimeError):
    pass


class StepSizeError(TmsnetError, RuntimeError):
    pass


class TruncationError(TmsnetError, ValueError):
    """Fock-space truncation is too small for the requested state."""


class UnphysicalCovarianceError(TmsnetError, ValueError):
    pass


class FitError(TmsnetError, RuntimeError):
    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class UndefinedFrameError(TmsnetError, ValueError):
    pass


class NonConvergenceError(TmsnetError, RuntimeError):
    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


class IntegrationError(TmsnetError, RuntimeError):
    pass
