"""Exception hierarchy shared by all modules.

The CLI maps ``ValidationError`` to exit code 2 and ``BudgetExceeded`` to 3.
"""


class RCCError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(RCCError, ValueError):
    """Malformed channel, input distribution, rate triple or file."""


class NegativeEntry(ValidationError):
    pass


class RowSumMismatch(ValidationError):
    def __init__(self, row, deviation):
        self.row = row
        self.deviation = deviation
        super().__init__(f"row {row} sums to 1{deviation:+.3e}")


class SizeMismatch(ValidationError):
    pass


class CardinalityExceeded(ValidationError):
    pass


class OverlappingSets(ValidationError):
    pass


class UnknownKind(ValidationError):
    pass


class WrongInputClass(ValidationError):
    pass


class NotClassNL(ValidationError):
    pass


class NegativeArgument(ValidationError):
    pass


class BudgetExceeded(RCCError):
    """A search or simulation ran past its configured budget.

    ``best`` carries whatever partial result was available.
    """

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


class CapExceeded(BudgetExceeded):
    pass
