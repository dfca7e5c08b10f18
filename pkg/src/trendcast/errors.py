"""Exception types raised across trendcast."""

from __future__ import annotations


class TrendcastError(ValueError):
    """Base class for data and argument errors."""


class MalformedInput(TrendcastError):
    pass


class GapTooLarge(TrendcastError):
    def __init__(self, message: str, *, at_minute: int, missing: int) -> None:
        super().__init__(message)
        self.at_minute = at_minute
        self.missing = missing


class DegenerateSeries(TrendcastError):
    pass


class InsufficientSpan(TrendcastError):
    pass


class OutOfHistory(TrendcastError):
    def __init__(self, message: str, *, origin: int | None = None) -> None:
        super().__init__(message)
        self.origin = origin


class WindowTooShort(TrendcastError):
    pass


class HorizonTooLong(TrendcastError):
    pass


class EmptyEvaluationRange(TrendcastError):
    pass


class PerfectForecast(TrendcastError):
    pass


class InvalidCapacity(TrendcastError):
    pass


class NearZeroDenominator(UserWarning):
    """Scaled persistence fell back to plain persistence."""
