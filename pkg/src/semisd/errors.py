"""Exception types raised across the package.

Every error carries a short machine-readable ``code`` so the CLI and the
JSON reports can name the failure without parsing messages.
"""


class SemiSDError(Exception):
    """Base class for all package errors."""

    code = "error"

    def __init__(self, message, **details):
        super().__init__(message)
        self.details = details


class TransformKindError(SemiSDError, TypeError):
    code = "wrong-transform-kind"


class CompleteMonotonicityError(SemiSDError, ValueError):
    """Raised when a candidate Laplace transform fails the finite-difference check.

    ``violation`` holds ``(order, grid_point, value)`` of the first failing
    difference.
    """

    code = "not-completely-monotone"

    def __init__(self, message, violation=None, report=None):
        super().__init__(message, violation=violation)
        self.violation = violation
        self.report = report


class TruncationUnsafeError(SemiSDError, ValueError):
    code = "truncation-unsafe"


class NotAPowerSeriesError(SemiSDError, ValueError):
    code = "not-a-power-series"


class VanishingTransformError(SemiSDError, ValueError):
    """A transform vanished where it has to be divided by (or logged)."""

    def __init__(self, message, code="vanishing-cf", witness=None):
        super().__init__(message, witness=witness)
        self.code = code
        self.witness = witness


class InvalidExponentError(SemiSDError, ValueError):
    code = "possibly-invalid-exponent"


class NotSemiSDAtRhoError(SemiSDError, ValueError):
    """The marginal failed its semi-SD certificate at the requested rho."""

    code = "not-semi-SD-at-rho"

    def __init__(self, message, report):
        super().__init__(message)
        self.report = report


class SamplerUnavailableError(SemiSDError, LookupError):
    code = "sampler-unavailable"

    def __init__(self, message, supported=()):
        super().__init__(message, supported=list(supported))
        self.supported = tuple(supported)


class SamplerAccuracyError(SemiSDError, RuntimeError):
    code = "sampler-accuracy"
