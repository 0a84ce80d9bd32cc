class ScreeningError(Exception):
    """Base class for errors raised by acscreen."""


class DataValidationError(ScreeningError, ValueError):
    """Input data or partition parameters are unusable."""


class SegmentTooSmall(DataValidationError):
    """A data segment holds fewer rows than a kernel's degree."""


class DegenerateDenominator(ScreeningError, ArithmeticError):
    """An aggregator hit a nonpositive variance-like denominator."""

    def __init__(self, term, value):
        self.term = term
        self.value = value
        super().__init__(f"degenerate denominator: {term} = {value!r}")
