"""Failure types that carry diagnostics for the caller."""


class ConvergenceError(RuntimeError):
    """An iterative procedure stalled before reaching its tolerance.

    ``details`` holds whatever the procedure can report (achieved error,
    iteration trace, ladder values) so callers can log or rerun.
    """

    def __init__(self, message, **details):
        super().__init__(message)
        self.details = details


class QuadratureError(ConvergenceError):
    """Adaptive quadrature could not certify the requested tolerance."""


class SpectralResolutionError(RuntimeError):
    """Eigenexpansion refused: not enough modes for the requested time.

    ``min_time`` is the smallest t the available spectrum can serve.
    """

    def __init__(self, message, min_time):
        super().__init__(message)
        self.min_time = min_time
