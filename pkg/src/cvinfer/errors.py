"""Exception hierarchy.

Everything derives from :class:`CVInferError`. Problems with the input data
derive from :class:`DataError`; failures of a numerical procedure on valid
data derive from :class:`NumericalError`. The command line maps these two
families onto exit codes 2 and 3.
"""


class CVInferError(Exception):
    pass


class DataError(CVInferError, ValueError):
    pass


class NumericalError(CVInferError, ArithmeticError):
    pass


class TooFewObservations(DataError):
    pass


class ZeroVariance(DataError):
    pass


class NegativeMeanGroup(DataError):
    pass


class NonPositiveParameter(DataError):
    pass


class RawDataRequired(DataError):
    pass


class InvalidParameter(DataError):
    pass


class DomainError(DataError):
    pass


class NoConvergence(NumericalError):
    pass


class ProfileExceedsMaximum(NumericalError):
    pass


class SingularGradientMatrix(NumericalError):
    pass


class NonPositiveInfoDeterminant(NumericalError):
    pass


class InconsistentSigns(NumericalError):
    pass


class BracketingFailed(NumericalError):
    def __init__(self, message, searched=None):
        super().__init__(message)
        self.searched = searched


class ZeroPivotalDenominator(NumericalError):
    pass


class OutOfBracket(NumericalError):
    pass
