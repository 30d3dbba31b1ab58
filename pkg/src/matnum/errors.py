"""Exception hierarchy shared by all modules."""


class MatnumError(Exception):
    """Base class for every error raised by this package."""


class SingularMatrix(MatnumError):
    pass


class ClassificationBudgetExceeded(MatnumError):
    """Root isolation could not separate an eigenvalue from the unit circle
    within the configured precision budget."""


class JordanUnstable(MatnumError):
    """The numerical real Jordan basis failed its residual check."""


class CloseLatticeViolation(MatnumError):
    pass


class EncodeBudgetExceeded(MatnumError):
    pass


class AlphabetMismatch(MatnumError):
    pass


class NotRepresentableError(MatnumError):
    """Raised by ``encode`` for vectors outside Fin_D(M); carries the witness."""

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class EnumerationCapExceeded(MatnumError):
    pass


class FactorizationLimit(MatnumError):
    pass
