"""Exception types shared across the package."""


class EmbedLabError(Exception):
    """Base class for every error raised by embedlab."""


class ParseError(EmbedLabError):
    """Input could not be decoded (bad JSON, missing keys, unknown id)."""


class ValidationError(EmbedLabError, ValueError):
    """Input decoded fine but violates a structural invariant."""


class NegativeProbability(ValidationError):
    def __init__(self, message, row=None, col=None):
        super().__init__(message)
        self.row = row
        self.col = col


class NotNormalized(ValidationError):
    pass


class MalformedTable(ValidationError):
    pass


class NotHermitian(ValidationError):
    pass


class NegativeEigenvalue(ValidationError):
    pass


class UnknownRegister(ValidationError, KeyError):
    def __str__(self):
        return Exception.__str__(self)


class KindMismatch(ValidationError, TypeError):
    pass


class DimensionMismatch(ValidationError):
    pass


class LayoutMismatch(ValidationError):
    pass


class PhaseKeyMismatch(ValidationError):
    pass


class ParameterOutOfRange(ValidationError):
    pass


class OutOfValidity(ValidationError):
    """A closed-form bound was requested outside its range of validity."""


class OutOfValidityWarning(UserWarning):
    pass


class DimensionTooLarge(EmbedLabError):
    """A resource guard tripped (matrix dimension or optimizer coordinates)."""
