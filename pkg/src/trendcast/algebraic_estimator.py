"""Degree-1 algebraic estimators of trend and trend slope on sliding windows.

On a window of length T, with sigma measured from the window start, the
iterated-integral forms of the degree-1 annihilator system give

    a0 = 2/T**2 * integral_0^T (2T - 3 sigma) y(sigma) d sigma
    a1 = 6/T**3 * integral_0^T (2 sigma - T) y(sigma) d sigma

where a0 is the line value at the window start and a1 its slope.  The
integrals are discretized with the trapezoidal rule and the weights then get
a minimum-norm rank-2 correction so the discrete moments hold exactly.  The
trend at the evaluation point (right edge for causal, midpoint for centered)
is a0 + a1 * offset, folded into a single value kernel.
"""

from __future__ import annotations

import csv
import enum
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import _kernels
from .errors import OutOfHistory, WindowTooShort
from .series_core import MINUTELY, SamplingSpec, TimeSeries, text_sink, window

DEFAULT_WINDOW = 60
# day-back slopes are never taken at the live edge, so a wider window is free
DEFAULT_CENTERED_WINDOW = 120
MIN_WINDOW_SAMPLES = 4


class Target(str, enum.Enum):
    VALUE_A0 = "value_a0"
    SLOPE_A1 = "slope_a1"


class Alignment(str, enum.Enum):
    CAUSAL = "causal_right_edge"
    CENTERED = "centered"


@dataclass(frozen=True)
class FilterKernel:
    """FIR weights over one window, oldest sample first."""

    weights: np.ndarray
    window_length_minutes: int
    period_minutes: int
    target: Target
    alignment: Alignment

    def __post_init__(self) -> None:
        w = np.array(self.weights, dtype=np.float64)
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    def __len__(self) -> int:
        return self.weights.size

    @property
    def offsets(self) -> np.ndarray:
        """Sample offsets in minutes from the evaluation point."""
        n = self.weights.size - 1
        anchor = n if self.alignment is Alignment.CAUSAL else n // 2
        return (np.arange(n + 1) - anchor) * float(self.period_minutes)

    @property
    def lead(self) -> int:
        """Samples of the window that lie after the evaluation point."""
        n = self.weights.size - 1
        return 0 if self.alignment is Alignment.CAUSAL else n // 2

    def moments(self) -> tuple[float, float]:
        return float(self.weights.sum()), float(self.weights @ self.offsets)

    def noise_gain(self) -> float:
        """Sum of squared weights: output variance per unit of white-noise variance."""
        return float(self.weights @ self.weights)


@dataclass(frozen=True)
class KernelPair:
    value: FilterKernel
    slope: FilterKernel

    @property
    def alignment(self) -> Alignment:
        return self.value.alignment

    @property
    def window_length_minutes(self) -> int:
        return self.value.window_length_minutes

    def __iter__(self):
        return iter((self.value, self.slope))


def _moment_correct(raw: np.ndarray, offsets: np.ndarray, target: tuple[float, float]) -> np.ndarray:
    A = np.vstack([np.ones_like(offsets), offsets])
    # scale the offset row so A A^T is well conditioned for long windows
    scale = max(1.0, float(np.max(np.abs(offsets))))
    A[1] /= scale
    goal = np.array([target[0], target[1] / scale])
    gram = A @ A.T
    w = raw
    for _ in range(2):
        w = w + A.T @ np.linalg.solve(gram, goal - A @ w)
    return w


def build_degree1_kernels(
    T: int = DEFAULT_WINDOW,
    period: int = 1,
    alignment: Alignment | str = Alignment.CAUSAL,
) -> KernelPair:
    """Build the (value, slope) kernels for a window of ``T`` minutes."""
    alignment = Alignment(alignment)
    if T % period:
        raise WindowTooShort(f"window {T} min is not a multiple of the {period} min period")
    n = T // period
    if n < MIN_WINDOW_SAMPLES:
        raise WindowTooShort(f"window must span at least {MIN_WINDOW_SAMPLES} periods, got {n}")
    if alignment is Alignment.CENTERED and n % 2:
        raise WindowTooShort(f"centered window needs an even number of periods, got {n}")

    sigma = np.arange(n + 1) * float(period)
    trap = np.full(n + 1, float(period))
    trap[[0, -1]] *= 0.5
    Tf = float(T)
    raw_a0 = trap * (2.0 / Tf**2) * (2.0 * Tf - 3.0 * sigma)
    raw_a1 = trap * (6.0 / Tf**3) * (2.0 * sigma - Tf)

    tau = Tf if alignment is Alignment.CAUSAL else Tf / 2.0
    offsets = sigma - tau
    value = _moment_correct(raw_a0 + tau * raw_a1, offsets, (1.0, 0.0))
    slope = _moment_correct(raw_a1, offsets, (0.0, 1.0))
    return KernelPair(
        FilterKernel(value, T, period, Target.VALUE_A0, alignment),
        FilterKernel(slope, T, period, Target.SLOPE_A1, alignment),
    )


def write_kernel_csv(kernels: KernelPair, path: str | Path) -> None:
    with text_sink(path) as fh:
        out = csv.writer(fh, lineterminator="\n")
        out.writerow(["offset_minutes", "weight_a0", "weight_a1"])
        for row in zip(kernels.value.offsets.tolist(), kernels.value.weights.tolist(),
                       kernels.slope.weights.tolist()):
            out.writerow([int(row[0]), repr(row[1]), repr(row[2])])


def _window_around(series: TimeSeries, t: int, kernel: FilterKernel) -> np.ndarray:
    if kernel.period_minutes != series.period:
        raise ValueError("kernel and series sampling periods differ")
    end = t + kernel.lead * series.period
    try:
        return window(series, end, len(kernel)).values
    except OutOfHistory:
        raise OutOfHistory(
            f"not enough history around minute {t} for a "
            f"{kernel.window_length_minutes} min {kernel.alignment.value} window",
            origin=int(t),
        ) from None


def estimate_trend(series: TimeSeries, t: int, kernels: KernelPair) -> tuple[float, float]:
    """Trend value and slope (per minute) at minute ``t``."""
    values = _window_around(series, t, kernels.value)
    return float(kernels.value.weights @ values), float(kernels.slope.weights @ values)


def estimate_derivative_centered(series: TimeSeries, t: int, kernel: FilterKernel | KernelPair) -> float:
    """Non-causal slope estimate at ``t`` from the window centered on it."""
    if isinstance(kernel, KernelPair):
        kernel = kernel.slope
    if kernel.alignment is not Alignment.CENTERED:
        raise ValueError("estimate_derivative_centered needs a centered kernel")
    return float(kernel.weights @ _window_around(series, t, kernel))


@dataclass(frozen=True)
class TrendSeries:
    """Trend and slope estimates on ``[valid_from, valid_to]``."""

    trend: np.ndarray
    derivative: np.ndarray
    valid_from: int
    sampling: SamplingSpec = field(default=MINUTELY)
    alignment: Alignment = Alignment.CAUSAL
    window_minutes: int = 0

    def __post_init__(self) -> None:
        trend = np.array(self.trend, dtype=np.float64)
        deriv = np.array(self.derivative, dtype=np.float64)
        if trend.shape != deriv.shape or trend.ndim != 1:
            raise ValueError("trend and derivative must be 1-D and the same length")
        trend.setflags(write=False)
        deriv.setflags(write=False)
        object.__setattr__(self, "trend", trend)
        object.__setattr__(self, "derivative", deriv)
        object.__setattr__(self, "valid_from", int(self.valid_from))

    def __len__(self) -> int:
        return self.trend.size

    @property
    def period(self) -> int:
        return self.sampling.period_minutes

    @property
    def valid_to(self) -> int:
        return self.valid_from + (len(self) - 1) * self.period

    @property
    def times(self) -> np.ndarray:
        return self.valid_from + self.period * np.arange(len(self), dtype=np.int64)

    def positions(self, t) -> np.ndarray:
        """Vectorized array positions of minutes ``t``; OutOfHistory if any is absent."""
        t = np.asarray(t, dtype=np.int64)
        q, r = np.divmod(t - self.valid_from, self.period)
        bad = (r != 0) | (q < 0) | (q >= len(self))
        if np.any(bad):
            first = int(np.ravel(t)[np.argmax(np.ravel(bad))])
            raise OutOfHistory(
                f"trend undefined at minute {first}; defined on "
                f"[{self.valid_from}, {self.valid_to}]",
                origin=first,
            )
        return q

    def covers(self, t: int) -> bool:
        q, r = divmod(int(t) - self.valid_from, self.period)
        return r == 0 and 0 <= q < len(self)

    def value(self, t: int) -> float:
        return float(self.trend[self.positions(t)])

    def slope(self, t: int) -> float:
        return float(self.derivative[self.positions(t)])

    def as_series(self) -> TimeSeries:
        return TimeSeries(self.valid_from, self.trend, self.sampling)

    @classmethod
    def from_values(cls, values, valid_from: int = 0, derivative=None, sampling: SamplingSpec = MINUTELY) -> "TrendSeries":
        """Wrap a known trend (e.g. a noiseless profile) directly."""
        values = np.asarray(values, dtype=np.float64)
        if derivative is None:
            derivative = np.gradient(values, float(sampling.period_minutes)) if values.size > 1 else np.zeros(1)
        return cls(values, derivative, valid_from, sampling)


def trend_series(series: TimeSeries, kernels: KernelPair) -> TrendSeries:
    """Apply a kernel pair at every timestamp that has a full window."""
    if kernels.value.period_minutes != series.period:
        raise ValueError("kernel and series sampling periods differ")
    n = len(kernels.value)
    if len(series) < n:
        raise WindowTooShort(
            f"series of {len(series)} samples is shorter than the {n}-sample window"
        )
    trend, deriv = _kernels.sliding_dot2(
        series.values, kernels.value.weights, kernels.slope.weights
    )
    first = series.start_index + (n - 1 - kernels.value.lead) * series.period
    return TrendSeries(
        trend, deriv, first, series.sampling, kernels.alignment, kernels.window_length_minutes
    )


def _dyadic_grid(x: np.ndarray) -> float:
    """Largest power of two dividing every sample, or 0 if there is none useful."""
    nz = x[x != 0]
    if not nz.size:
        return 0.0
    mant, expo = np.frexp(nz)
    ints = (mant * 2.0**53).astype(np.int64)
    low = np.log2((ints & -ints).astype(np.float64)).astype(np.int64) + expo - 53
    grid = 2.0 ** int(low.min())
    # leave headroom so x - t and t + r stay exact
    return grid if np.max(np.abs(nz)) < 2.0**48 * grid else 0.0


def _exact_split(x: np.ndarray, trend: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(trend', residual)`` with ``trend' + residual == x`` bitwise.

    When the samples share a coarse enough dyadic grid the trend is snapped
    onto it, so every difference and sum below is exact.  Otherwise the
    residual is nudged by ulps, which can fail where the trend exceeds about
    twice the sample: the sum then lives on a coarser grid than x.
    """
    grid = _dyadic_grid(x)
    if grid:
        trend = np.round(trend / grid) * grid
    residual = x - trend
    for _ in range(4):
        bad = np.flatnonzero(trend + residual != x)
        if not bad.size:
            break
        towards = np.where(trend[bad] + residual[bad] < x[bad], np.inf, -np.inf)
        residual[bad] = np.nextafter(residual[bad], towards)
    return trend, residual


def decompose(series: TimeSeries, kernels: KernelPair) -> tuple[TrendSeries, TimeSeries]:
    """Split ``series`` into trend and quick-fluctuation residual.

    The residual covers exactly the trend's valid range and satisfies
    ``trend + residual == series`` bitwise there whenever the samples lie on
    a common dyadic grid (synthetic traces, integer counts); the trend is
    then rounded to that grid, moving it by at most half a grid step.
    """
    if len(series) <= len(kernels.value) - 1:
        raise WindowTooShort(
            f"series of {len(series)} samples needs more than "
            f"{len(kernels.value) - 1} samples for this window"
        )
    ts = trend_series(series, kernels)
    lo = series.position(ts.valid_from)
    x = series.values[lo: lo + len(ts)]
    trend, residual = _exact_split(x, ts.trend)
    ts = replace(ts, trend=trend)
    return ts, TimeSeries(ts.valid_from, residual, series.sampling)


def residual_day_means(residual: TimeSeries) -> np.ndarray:
    """Mean residual over each complete day in ``residual``; reported, not enforced."""
    per_day = residual.sampling.samples_per_day
    full = len(residual) // per_day
    if not full:
        return np.empty(0)
    return residual.values[: full * per_day].reshape(full, per_day).mean(axis=1)
