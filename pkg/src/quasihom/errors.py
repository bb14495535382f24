"""Exception types shared across the package."""


class QuasihomError(Exception):
    """Base class for all package errors."""

    #: CLI exit status used when this error escapes a command
    exit_code = 3
    kind = "numerical"

    def record(self):
        return {"error": type(self).__name__, "kind": self.kind, "message": str(self)}


class InvalidMaterialError(QuasihomError, ValueError):
    exit_code = 2
    kind = "config"

    def __init__(self, message, x=None, y=None):
        super().__init__(message)
        self.x = x
        self.y = y


class InsufficientDataError(QuasihomError, ValueError):
    exit_code = 2
    kind = "config"


class CompatibilityError(QuasihomError):
    """A periodic cell problem was given a source with non-zero mean."""

    def __init__(self, message, residual_mean=None, problem=None):
        super().__init__(message)
        self.residual_mean = residual_mean
        self.problem = problem


class DependencyError(QuasihomError):
    """Cell data required by a coefficient is missing."""


class InvalidCoefficientError(QuasihomError):
    pass


class DegenerateOperatorError(QuasihomError):
    pass


class BandGapError(QuasihomError):
    def __init__(self, message, last_valid_k=None):
        super().__init__(message)
        self.last_valid_k = last_valid_k


class ResonanceError(QuasihomError):
    pass


class AlignmentError(QuasihomError, ValueError):
    pass
