"""Exception hierarchy shared by every module.

Each class carries a short machine-readable ``code`` which the command line
prints next to the message.
"""


class WishartError(ValueError):
    code = "WISHART_ERROR"


class DomainError(WishartError):
    code = "DOMAIN_ERROR"


class DimensionMismatch(WishartError):
    code = "DIMENSION_MISMATCH"


class NotPositiveDefinite(WishartError):
    code = "NOT_POSITIVE_DEFINITE"


class EmptySample(WishartError):
    code = "EMPTY_SAMPLE"


class NoRootInBracket(WishartError):
    code = "NO_ROOT_IN_BRACKET"


class NumericalFailure(WishartError):
    code = "NUMERICAL_FAILURE"


class ChiSquareDiverges(WishartError):
    code = "CHI_SQUARE_DIVERGES"


class QuadratureFailure(WishartError):
    code = "QUADRATURE_FAILURE"


class InsufficientData(WishartError):
    code = "INSUFFICIENT_DATA"


class ParseError(WishartError):
    code = "PARSE_ERROR"


class ValidationError(WishartError):
    code = "VALIDATION_ERROR"

    def __init__(self, message, key=None):
        super().__init__(message)
        self.key = key
