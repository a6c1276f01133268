"""Exception and warning types raised across the package."""


class QIChernoffError(Exception):
    """Base class for errors raised by this package."""


class InvalidCovariance(QIChernoffError, ValueError):
    pass


class DimensionMismatch(QIChernoffError, ValueError):
    pass


class GridMismatch(QIChernoffError, ValueError):
    pass


class BasisNotOrthonormal(QIChernoffError, ValueError):
    pass


class InvalidTransmissivity(QIChernoffError, ValueError):
    pass


class NotPRepresentable(QIChernoffError, ValueError):
    pass


class IllConditioned(QIChernoffError, ArithmeticError):
    """A determinant or inverse in the Gaussian overlap is numerically singular."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = dict(diagnostics or {})


class TruncationDeficit(QIChernoffError, ValueError):
    """The Fock truncation discards more probability than allowed."""

    def __init__(self, message, deficit, suggested_cutoffs):
        super().__init__(message)
        self.deficit = deficit
        self.suggested_cutoffs = tuple(suggested_cutoffs)


class FockSpaceTooLarge(QIChernoffError, ValueError):
    """The truncated Fock space exceeds the configured dimension budget."""


class InvalidZerothOrder(QIChernoffError, ValueError):
    pass


class NeedTwoTargets(QIChernoffError, ValueError):
    pass


class DegenerateSpectrum(UserWarning):
    pass


class SpanDeficient(UserWarning):
    pass


class IndistinguishablePair(UserWarning):
    pass
