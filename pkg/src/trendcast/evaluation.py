"""Scoring forecasters by summed squared error and laying out the comparison table."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .algebraic_estimator import (
    DEFAULT_CENTERED_WINDOW,
    DEFAULT_WINDOW,
    Alignment,
    TrendSeries,
    build_degree1_kernels,
    trend_series,
)
from .errors import EmptyEvaluationRange, PerfectForecast
from .forecasters import Method, check_horizon, default_origins, predict
from .series_core import TimeSeries, text_sink

DEFAULT_HORIZONS = (5, 30, 60)
DEFAULT_METHODS = (Method.SCALED, Method.ALGEBRAIC, Method.MIXED)
REFERENCE_METHOD = Method.SCALED
# sentinel for a vanishing residual
INFINITE_SNR = math.inf


@dataclass(frozen=True)
class MethodScores:
    method: Method
    horizon_h: int
    sse: float
    gain_vs_reference_percent: float
    snr_db: float
    n: int


@dataclass(frozen=True)
class EvaluationReport:
    horizons: tuple[int, ...]
    methods: tuple[Method, ...]
    scores: tuple[MethodScores, ...]
    origin_first: int
    origin_last: int
    series_snr_db: float
    reference: str

    def cell(self, method: Method | str, horizon: int) -> MethodScores:
        method = Method(method)
        for s in self.scores:
            if s.method is method and s.horizon_h == horizon:
                return s
        raise KeyError((method.value, horizon))

    def write_csv(self, path: str | Path) -> None:
        with text_sink(path) as fh:
            out = csv.writer(fh, lineterminator="\n")
            out.writerow(["horizon", "method", "sse", "gain_percent", "snr_db"])
            for s in self.scores:
                out.writerow([s.horizon_h, s.method.value, repr(s.sse),
                              repr(s.gain_vs_reference_percent), repr(s.snr_db)])

    def to_text(self) -> str:
        return format_table(self)


def _overlap(forecast_targets: np.ndarray, reference: TrendSeries) -> np.ndarray:
    q, r = np.divmod(forecast_targets - reference.valid_from, reference.period)
    return (r == 0) & (q >= 0) & (q < len(reference))


def sse(forecast, reference_trend: TrendSeries) -> float:
    """Sum of squared differences between predictions and the reference trend at ``origin + h``.

    Origins whose target falls outside the reference are skipped; an empty
    overlap raises EmptyEvaluationRange.
    """
    targets = forecast.targets
    keep = _overlap(targets, reference_trend)
    if not np.any(keep):
        raise EmptyEvaluationRange("no forecast target lies inside the reference trend")
    truth = reference_trend.trend[reference_trend.positions(targets[keep])]
    err = forecast.predicted[keep] - truth
    return float(err @ err)


def gain_vs_reference(sse_method: float, sse_reference: float) -> float:
    """Percent improvement over the reference, relative to the method's own SSE."""
    if sse_method == 0:
        raise PerfectForecast("method SSE is zero; gain is unbounded")
    return (sse_reference - sse_method) / sse_method * 100.0


def _snr(signal: np.ndarray, noise: np.ndarray) -> float:
    noise_power = float(noise @ noise)
    if noise_power == 0.0:
        return INFINITE_SNR
    return 10.0 * math.log10(float(signal @ signal) / noise_power)


def snr_db(series: TimeSeries, trend: TrendSeries) -> float:
    """Trend-to-fluctuation power ratio in dB over the range the trend covers.

    Returns INFINITE_SNR when the residual vanishes.
    """
    t = trend.times
    keep = (t >= series.start_index) & (t <= series.end_index)
    if not np.any(keep):
        raise EmptyEvaluationRange("trend and series do not overlap")
    x = series.values[(t[keep] - series.start_index) // series.period]
    tr = trend.trend[keep]
    return _snr(tr, x - tr)


def common_origins(
    series: TimeSeries,
    methods: Iterable[Method],
    horizons: Sequence[int],
    trend: TrendSeries,
    centered: TrendSeries,
    reference: TrendSeries,
    window: int = DEFAULT_WINDOW,
) -> tuple[int, int]:
    """Origin range on which every (method, horizon) cell can be scored."""
    first, last = -(2**62), 2**62
    for h in horizons:
        for m in methods:
            grid = default_origins(m, h, series, trend, centered, window)
            if not grid.size:
                raise EmptyEvaluationRange(f"{m.value} has no valid origin at h={h}")
            first, last = max(first, int(grid[0])), min(last, int(grid[-1]))
        first = max(first, reference.valid_from - h)
        last = min(last, reference.valid_to - h)
    if last < first:
        raise EmptyEvaluationRange("methods and horizons share no evaluation range")
    return first, last


def build_comparison_table(
    series: TimeSeries,
    horizons: Sequence[int] = DEFAULT_HORIZONS,
    methods: Sequence[Method | str] = DEFAULT_METHODS,
    *,
    window: int = DEFAULT_WINDOW,
    centered_window: int = DEFAULT_CENTERED_WINDOW,
    reference_window: int = DEFAULT_WINDOW,
    score_against_raw: bool = False,
    allow_long_horizon: bool = False,
) -> EvaluationReport:
    """Score every method at every horizon against the hindsight trend.

    The hindsight trend is the centered estimate on the full trace (or the
    raw series with ``score_against_raw``).  Gains are relative to scaled
    persistence, whose SSE is computed even when it is not listed.
    """
    horizons = tuple(check_horizon(h, allow_long_horizon) for h in horizons)
    methods = tuple(dict.fromkeys(Method(m) for m in methods))
    if not horizons or not methods:
        raise EmptyEvaluationRange("need at least one horizon and one method")
    period = series.period
    trend = trend_series(series, build_degree1_kernels(window, period, Alignment.CAUSAL))
    centered = trend_series(
        series, build_degree1_kernels(centered_window, period, Alignment.CENTERED)
    )
    if score_against_raw:
        reference = TrendSeries(series.values, np.zeros(len(series)), series.start_index,
                                series.sampling)
    else:
        reference = trend_series(
            series, build_degree1_kernels(reference_window, period, Alignment.CENTERED)
        )

    scored = tuple(dict.fromkeys(methods + (REFERENCE_METHOD,)))
    first, last = common_origins(series, scored, horizons, trend, centered, reference, window)
    origins = np.arange(first, last + 1, period, dtype=np.int64)

    cells = []
    for h in horizons:
        truth = reference.trend[reference.positions(origins + h)]
        errs = {}
        for m in scored:
            pred, _ = predict(m, trend, origins, h, centered)
            errs[m] = (pred, pred - truth)
        ref_sse = float(errs[REFERENCE_METHOD][1] @ errs[REFERENCE_METHOD][1])
        for m in methods:
            pred, e = errs[m]
            cell_sse = float(e @ e)
            try:
                gain = gain_vs_reference(cell_sse, ref_sse)
            except PerfectForecast:
                gain = math.inf
            cells.append(MethodScores(m, h, cell_sse, gain, _snr(pred, e), origins.size))

    return EvaluationReport(
        horizons=horizons,
        methods=methods,
        scores=tuple(cells),
        origin_first=first,
        origin_last=last,
        series_snr_db=snr_db(series, trend),
        reference="raw" if score_against_raw else f"centered/{reference_window}min",
    )


def format_table(report: EvaluationReport) -> str:
    """Plain-text table: one row per horizon, reference column first."""
    order = sorted(report.methods, key=lambda m: m is not REFERENCE_METHOD)
    header = ["Prediction horizons"] + [
        m.short if m is REFERENCE_METHOD else f"{m.short} [gain in %]" for m in order
    ]
    rows = []
    for h in report.horizons:
        row = [f"t+{h}min"]
        for m in order:
            s = report.cell(m, h)
            if m is REFERENCE_METHOD:
                row.append(f"{s.sse:.2f}")
            else:
                row.append(f"{s.sse:.2f} [{s.gain_vs_reference_percent:.2f}%]")
        rows.append(row)
    widths = [max(len(r[i]) for r in [header] + rows) for i in range(len(header))]
    def fmt(r):
        cells = [r[0].ljust(widths[0])] + [c.rjust(w) for c, w in zip(r[1:], widths[1:])]
        return "  ".join(cells).rstrip()

    lines = ["Sum of squared errors", fmt(header), "-" * len(fmt(header))]
    lines += [fmt(r) for r in rows]
    lines.append(
        f"origins {report.origin_first}..{report.origin_last}, reference {report.reference}, "
        f"series SNR {report.series_snr_db:.2f} dB"
    )
    snrs = ", ".join(
        f"{s.method.short}@{s.horizon_h}: {s.snr_db:.1f}" for s in report.scores
    )
    lines.append(f"forecast SNR (dB): {snrs}")
    return "\n".join(lines) + "\n"
