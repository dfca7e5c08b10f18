"""Horizon-h trend forecasters.

Four predictors of the trend at ``t + h`` from information available at ``t``:

* persistence: ``X(t)``
* scaled persistence: ``X(t) * X(t - D + h) / X(t - D)`` with D one day
* algebraic: ``X(t) + X'(t) * h``, slope from the causal estimator
* mixed: ``X(t) + X'(t - D + h) * h``, slope from the centered estimator a
  day back, where the whole window is already in the past
"""

from __future__ import annotations

import csv
import enum
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .algebraic_estimator import (
    DEFAULT_CENTERED_WINDOW,
    DEFAULT_WINDOW,
    Alignment,
    KernelPair,
    TrendSeries,
    build_degree1_kernels,
    estimate_derivative_centered,
    trend_series,
)
from .errors import HorizonTooLong, NearZeroDenominator, OutOfHistory
from .series_core import MINUTES_PER_DAY, TimeSeries, text_sink

MAX_HORIZON = 60
EPS_DIV_RELATIVE = 1e-6


class Method(str, enum.Enum):
    PERSISTENCE = "persistence"
    SCALED = "scaled"
    ALGEBRAIC = "algebraic"
    MIXED = "mixed"

    @property
    def short(self) -> str:
        return _SHORT[self]


_SHORT = {
    Method.PERSISTENCE: "Pn",
    Method.SCALED: "Pe",
    Method.ALGEBRAIC: "Al",
    Method.MIXED: "Mi",
}

SEASONAL = (Method.SCALED, Method.MIXED)


def check_horizon(h: int, allow_long: bool = False) -> int:
    h = int(h)
    if h <= 0:
        raise HorizonTooLong(f"horizon must be positive, got {h}")
    if h > MAX_HORIZON and not allow_long:
        raise HorizonTooLong(
            f"horizon {h} min exceeds {MAX_HORIZON} min; pass allow_long to override"
        )
    return h


@dataclass(frozen=True)
class ForecastRequest:
    origin_t: int
    horizon_h: int
    method: Method
    allow_long_horizon: bool = False

    def __post_init__(self) -> None:
        object.__setattr__(self, "method", Method(self.method))
        check_horizon(self.horizon_h, self.allow_long_horizon)


@dataclass(frozen=True)
class ForecastSeries:
    """Predicted trend at ``origin + h`` for each origin."""

    origins: np.ndarray
    horizon_h: int
    method: Method
    predicted: np.ndarray
    flagged: np.ndarray = field(default=None)

    def __post_init__(self) -> None:
        origins = np.asarray(self.origins, dtype=np.int64)
        predicted = np.asarray(self.predicted, dtype=np.float64)
        flagged = (
            np.zeros(origins.size, dtype=bool)
            if self.flagged is None
            else np.asarray(self.flagged, dtype=bool)
        )
        if not origins.shape == predicted.shape == flagged.shape:
            raise ValueError("origins, predicted and flagged must align")
        object.__setattr__(self, "origins", origins)
        object.__setattr__(self, "predicted", predicted)
        object.__setattr__(self, "flagged", flagged)
        object.__setattr__(self, "method", Method(self.method))

    def __len__(self) -> int:
        return self.origins.size

    @property
    def targets(self) -> np.ndarray:
        return self.origins + self.horizon_h

    def write_csv(self, path: str | Path, *, append: bool = False) -> None:
        write_forecasts_csv([self], path, append=append)


def write_forecasts_csv(forecasts, path: str | Path, *, append: bool = False) -> None:
    with text_sink(path, append) as fh:
        out = csv.writer(fh, lineterminator="\n")
        if not append:
            out.writerow(["origin_t", "horizon", "method", "predicted"])
        for fc in forecasts:
            name = fc.method.value
            for t, v in zip(fc.origins.tolist(), fc.predicted.tolist()):
                out.writerow([t, fc.horizon_h, name, repr(v)])


# ----------------------------------------------------------------- point forecasts


def forecast_persistence(trend: TrendSeries, t: int, h: int) -> float:
    return trend.value(t)


def default_eps_div(trend: TrendSeries) -> float:
    peak = float(np.max(np.abs(trend.trend))) if len(trend) else 0.0
    return EPS_DIV_RELATIVE * peak


def forecast_scaled_persistence(
    trend: TrendSeries, t: int, h: int, eps_div: float | None = None
) -> float:
    """Persistence corrected by yesterday's ratio over the same horizon.

    Falls back to persistence, with a NearZeroDenominator warning, when the
    day-back trend is within ``eps_div`` of zero.
    """
    D = MINUTES_PER_DAY
    base = trend.value(t)
    then, then_h = trend.value(t - D), trend.value(t - D + h)
    eps = default_eps_div(trend) if eps_div is None else eps_div
    if abs(then) <= eps:
        warnings.warn(
            NearZeroDenominator(f"|trend({t - D})| <= {eps:g}; using persistence at {t}"),
            stacklevel=2,
        )
        return base
    return then_h / then * base


def forecast_algebraic(trend: TrendSeries, t: int, h: int) -> float:
    return trend.value(t) + trend.slope(t) * h


def _centered_slope_at(series: TimeSeries | None, centered, t: int) -> float:
    if isinstance(centered, TrendSeries):
        return centered.slope(t)
    return estimate_derivative_centered(series, t, centered)


def forecast_mixed(
    trend: TrendSeries,
    series: TimeSeries | None,
    t: int,
    h: int,
    centered: KernelPair | TrendSeries | None = None,
) -> float:
    """Current trend extrapolated with the centered slope from one day back.

    ``centered`` is a centered kernel pair, or a precomputed centered
    TrendSeries; by default a DEFAULT_CENTERED_WINDOW centered pair is built.
    """
    D = MINUTES_PER_DAY
    if centered is None:
        centered = build_degree1_kernels(DEFAULT_CENTERED_WINDOW, trend.period, Alignment.CENTERED)
    back = t - D + h
    if isinstance(centered, KernelPair):
        half = centered.window_length_minutes // 2
        if back + half > t:
            raise OutOfHistory(
                f"centered window around {back} reaches past origin {t}", origin=int(t)
            )
    return trend.value(t) + _centered_slope_at(series, centered, back) * h


# ----------------------------------------------------------------- batch forecasts


def _span(first: int, last: int, step: int) -> np.ndarray:
    if last < first:
        return np.empty(0, dtype=np.int64)
    return np.arange(first, last + 1, step, dtype=np.int64)


def valid_origins(
    method: Method | str,
    h: int,
    trend: TrendSeries,
    centered: TrendSeries | None = None,
) -> tuple[int, int]:
    """Inclusive ``(first, last)`` origin range satisfying the method's history needs."""
    method = Method(method)
    D = MINUTES_PER_DAY
    first, last = trend.valid_from, trend.valid_to
    if method is Method.SCALED:
        first = max(first, trend.valid_from + D)
    elif method is Method.MIXED:
        if centered is None:
            raise ValueError("mixed needs the centered trend series")
        if h + centered.window_minutes // 2 > D:
            raise OutOfHistory(
                f"h={h} puts the day-back centered window past the origin"
            )
        first = max(first, centered.valid_from + D - h)
        last = min(last, centered.valid_to + D - h)
    return first, last


def seasonal_warmup(h: int, window: int = DEFAULT_WINDOW) -> int:
    """Minutes at the start of a series with no scaled or mixed forecasts."""
    return MINUTES_PER_DAY + h + window // 2


def default_origins(
    method: Method | str,
    h: int,
    series: TimeSeries,
    trend: TrendSeries,
    centered: TrendSeries | None = None,
    window: int = DEFAULT_WINDOW,
) -> np.ndarray:
    method = Method(method)
    first, last = valid_origins(method, h, trend, centered)
    if method in SEASONAL:
        first = max(first, series.start_index + seasonal_warmup(h, window))
    step = trend.period
    first = trend.valid_from + -(-(first - trend.valid_from) // step) * step
    return _span(first, last, step)


def _check_origins(origins: np.ndarray, method: Method, h: int, trend, centered) -> None:
    if not origins.size:
        return
    first, last = valid_origins(method, h, trend, centered)
    step = trend.period
    bad = (origins < first) | (origins > last) | ((origins - trend.valid_from) % step != 0)
    if np.any(bad):
        t = int(origins[np.argmax(bad)])
        raise OutOfHistory(
            f"{method.value} forecast at origin {t} (h={h}) lacks history; "
            f"valid origins are [{first}, {last}]",
            origin=t,
        )


def predict(
    method: Method | str,
    trend: TrendSeries,
    origins: np.ndarray,
    h: int,
    centered: TrendSeries | None = None,
    eps_div: float | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized forecasts at ``origins``; returns ``(predicted, flagged)``."""
    method = Method(method)
    origins = np.asarray(origins, dtype=np.int64)
    _check_origins(origins, method, h, trend, centered)
    flagged = np.zeros(origins.size, dtype=bool)
    if not origins.size:
        return np.empty(0), flagged
    D = MINUTES_PER_DAY
    base = trend.trend[trend.positions(origins)]
    if method is Method.PERSISTENCE:
        return base.copy(), flagged
    if method is Method.ALGEBRAIC:
        return base + trend.derivative[trend.positions(origins)] * h, flagged
    if method is Method.MIXED:
        back = centered.derivative[centered.positions(origins - D + h)]
        return base + back * h, flagged
    then = trend.trend[trend.positions(origins - D)]
    then_h = trend.trend[trend.positions(origins - D + h)]
    eps = default_eps_div(trend) if eps_div is None else eps_div
    flagged = np.abs(then) <= eps
    safe = np.where(flagged, 1.0, then)
    return np.where(flagged, base, then_h / safe * base), flagged


def batch_forecast(
    series: TimeSeries,
    method: Method | str,
    h: int,
    origins=None,
    *,
    window: int = DEFAULT_WINDOW,
    centered_window: int = DEFAULT_CENTERED_WINDOW,
    allow_long_horizon: bool = False,
    trend: TrendSeries | None = None,
    centered: TrendSeries | None = None,
    eps_div: float | None = None,
) -> ForecastSeries:
    """Run one method over a range of origins.

    ``origins`` may be an iterable of minutes or an inclusive ``(first, last)``
    pair; by default every origin with enough history is used, and seasonal
    methods additionally skip the first ``seasonal_warmup(h)`` minutes.
    Precomputed ``trend``/``centered`` series are reused when given.
    """
    method = Method(method)
    h = check_horizon(h, allow_long_horizon)
    if trend is None:
        trend = trend_series(series, build_degree1_kernels(window, series.period, Alignment.CAUSAL))
    if method is Method.MIXED and centered is None:
        centered = trend_series(
            series, build_degree1_kernels(centered_window, series.period, Alignment.CENTERED)
        )
    if origins is None:
        grid = default_origins(method, h, series, trend, centered, window)
    elif isinstance(origins, tuple) and len(origins) == 2:
        grid = _span(int(origins[0]), int(origins[1]), trend.period)
    else:
        grid = np.asarray(list(origins) if not isinstance(origins, np.ndarray) else origins,
                          dtype=np.int64)
    predicted, flagged = predict(method, trend, grid, h, centered, eps_div)
    return ForecastSeries(grid, h, method, predicted, flagged)
