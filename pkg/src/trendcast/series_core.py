"""Uniformly sampled workload series: ingestion, normalization, slicing, synthesis."""

from __future__ import annotations

import csv
import math
from contextlib import contextmanager
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterator, TextIO

import numpy as np

from .errors import (
    DegenerateSeries,
    GapTooLarge,
    InsufficientSpan,
    MalformedInput,
    OutOfHistory,
)

MINUTES_PER_DAY = 1440
DEFAULT_MAX_GAP = 5
SYNTH_RESOLUTION = 2.0**-30


@dataclass(frozen=True)
class SamplingSpec:
    period_minutes: int = 1
    samples_per_day: int = MINUTES_PER_DAY

    def __post_init__(self) -> None:
        if self.period_minutes < 1:
            raise ValueError("period_minutes must be >= 1")
        if self.period_minutes * self.samples_per_day != MINUTES_PER_DAY:
            raise ValueError(
                f"samples_per_day * period_minutes must be {MINUTES_PER_DAY}, got "
                f"{self.samples_per_day} * {self.period_minutes}"
            )

    @classmethod
    def every(cls, period_minutes: int) -> "SamplingSpec":
        if period_minutes < 1 or MINUTES_PER_DAY % period_minutes:
            raise ValueError(f"period must divide {MINUTES_PER_DAY}, got {period_minutes}")
        return cls(period_minutes, MINUTES_PER_DAY // period_minutes)

    def samples(self, minutes: int) -> int:
        """Convert a duration in minutes into a whole number of samples."""
        q, r = divmod(int(minutes), self.period_minutes)
        if r:
            raise ValueError(
                f"{minutes} min is not a multiple of the {self.period_minutes} min period"
            )
        return q


MINUTELY = SamplingSpec()


@dataclass(frozen=True)
class TimeSeries:
    """Immutable, gap-free series; sample i sits at ``start_index + i * period``."""

    start_index: int
    values: np.ndarray
    sampling: SamplingSpec = field(default=MINUTELY)

    def __post_init__(self) -> None:
        values = np.array(self.values, dtype=np.float64)
        if values.ndim != 1 or values.size == 0:
            raise MalformedInput("a series needs at least one sample")
        if not np.all(np.isfinite(values)):
            raise MalformedInput("series contains non-finite samples")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "start_index", int(self.start_index))

    def __len__(self) -> int:
        return self.values.size

    @property
    def period(self) -> int:
        return self.sampling.period_minutes

    @property
    def end_index(self) -> int:
        """Minute index of the last sample (inclusive)."""
        return self.start_index + (len(self) - 1) * self.period

    @property
    def times(self) -> np.ndarray:
        return self.start_index + self.period * np.arange(len(self), dtype=np.int64)

    def position(self, t: int) -> int:
        """Array position of minute ``t``; raises OutOfHistory if absent."""
        q, r = divmod(int(t) - self.start_index, self.period)
        if r or not 0 <= q < len(self):
            raise OutOfHistory(
                f"minute {t} is outside [{self.start_index}, {self.end_index}]", origin=int(t)
            )
        return q

    def value_at(self, t: int) -> float:
        return float(self.values[self.position(t)])

    def with_values(self, values: np.ndarray) -> "TimeSeries":
        return TimeSeries(self.start_index, values, self.sampling)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, TimeSeries):
            return NotImplemented
        return (
            self.start_index == other.start_index
            and self.sampling == other.sampling
            and np.array_equal(self.values, other.values)
        )

    __hash__ = None


def window(series: TimeSeries, end_index: int, length: int) -> TimeSeries:
    """Return the ``length`` samples ending at minute ``end_index`` inclusive."""
    if length < 1:
        raise OutOfHistory("window length must be positive")
    try:
        stop = series.position(end_index) + 1
    except OutOfHistory:
        raise OutOfHistory(
            f"window end {end_index} is outside the series", origin=end_index
        ) from None
    begin = stop - length
    if begin < 0:
        raise OutOfHistory(
            f"window of {length} samples ending at {end_index} starts before "
            f"{series.start_index}",
            origin=end_index,
        )
    return TimeSeries(
        series.start_index + begin * series.period, series.values[begin:stop], series.sampling
    )


def normalize_max(series: TimeSeries) -> tuple[TimeSeries, float]:
    """Divide by the largest absolute sample; return the series and that scale."""
    scale = float(np.max(np.abs(series.values)))
    if scale == 0.0:
        raise DegenerateSeries("cannot normalize an all-zero series")
    return series.with_values(series.values / scale), scale


# --------------------------------------------------------------------------- CSV


def _parse_time(text: str, line: int) -> int:
    text = text.strip()
    try:
        return int(text)
    except ValueError:
        pass
    try:
        stamp = datetime.fromisoformat(text.replace("Z", "+00:00"))
    except ValueError:
        raise MalformedInput(f"line {line}: cannot parse time {text!r}") from None
    if stamp.tzinfo is None:
        stamp = stamp.replace(tzinfo=timezone.utc)
    if stamp.second or stamp.microsecond:
        raise MalformedInput(f"line {line}: timestamp {text!r} is not on a whole minute")
    return int(stamp.timestamp()) // 60


def _parse_value(text: str, line: int) -> float:
    try:
        value = float(text)
    except ValueError:
        raise MalformedInput(f"line {line}: non-numeric value {text!r}") from None
    if not math.isfinite(value):
        raise MalformedInput(f"line {line}: non-finite value {text!r}")
    return value


def ingest_csv(
    path: str | Path | TextIO,
    *,
    time_column: str = "t",
    value_column: str = "value",
    max_gap: int = DEFAULT_MAX_GAP,
    sampling: SamplingSpec = MINUTELY,
) -> TimeSeries:
    """Read a ``t,value`` CSV into a gap-free TimeSeries.

    ``t`` is an integer minute index or an ISO-8601 timestamp (naive stamps
    are taken as UTC and mapped to minutes since the Unix epoch).  Runs of at
    most ``max_gap`` missing samples are filled by linear interpolation;
    longer runs raise GapTooLarge.  A header row is optional.
    """
    if hasattr(path, "read"):
        rows = [(n, row) for n, row in enumerate(csv.reader(path), start=1) if row]
        path = getattr(path, "name", "<stream>")
    else:
        with open(path, newline="", encoding="utf-8") as fh:
            rows = [(n, row) for n, row in enumerate(csv.reader(fh), start=1) if row]
    if not rows:
        raise MalformedInput(f"{path}: no rows")

    t_col, v_col = 0, 1
    first = rows[0][1]
    try:
        _parse_value(first[1] if len(first) > 1 else "", 1)
        _parse_time(first[0], 1)
    except MalformedInput:
        header = [h.strip() for h in first]
        try:
            t_col, v_col = header.index(time_column), header.index(value_column)
        except ValueError:
            raise MalformedInput(
                f"{path}: header {header} lacks {time_column!r}/{value_column!r}"
            ) from None
        rows = rows[1:]
    if not rows:
        raise MalformedInput(f"{path}: header but no data")

    times = np.empty(len(rows), dtype=np.int64)
    values = np.empty(len(rows), dtype=np.float64)
    for k, (line, row) in enumerate(rows):
        if len(row) <= max(t_col, v_col):
            raise MalformedInput(f"line {line}: expected at least {max(t_col, v_col) + 1} fields")
        times[k] = _parse_time(row[t_col], line)
        values[k] = _parse_value(row[v_col], line)

    steps = np.diff(times)
    bad = np.flatnonzero(steps <= 0)
    if bad.size:
        line = rows[bad[0] + 1][0]
        raise MalformedInput(f"line {line}: timestamps are not strictly increasing")
    period = sampling.period_minutes
    if np.any((times - times[0]) % period):
        raise MalformedInput(f"timestamps are not aligned to the {period} min period")

    missing = steps // period - 1
    worst = int(np.argmax(missing)) if missing.size else 0
    if missing.size and missing[worst] > max_gap:
        raise GapTooLarge(
            f"{int(missing[worst])} missing samples after minute {int(times[worst])} "
            f"(limit {max_gap})",
            at_minute=int(times[worst]),
            missing=int(missing[worst]),
        )

    grid = np.arange(times[0], times[-1] + 1, period, dtype=np.int64)
    filled = values if grid.size == times.size else np.interp(grid, times, values)
    return TimeSeries(int(times[0]), filled, sampling)


@contextmanager
def text_sink(target: str | Path | TextIO, append: bool = False) -> Iterator[TextIO]:
    """Yield ``target`` itself if it is a stream, else the opened file."""
    if hasattr(target, "write"):
        yield target
        return
    with open(target, "a" if append else "w", newline="", encoding="utf-8") as fh:
        yield fh


def write_csv(series: TimeSeries, path: str | Path | TextIO) -> None:
    """Emit ``t,value`` with shortest round-trip float formatting."""
    with text_sink(path) as fh:
        _write_rows(series, fh)


def _write_rows(series: TimeSeries, fh: TextIO) -> None:
    out = csv.writer(fh, lineterminator="\n")
    out.writerow(["t", "value"])
    for t, v in zip(series.times.tolist(), series.values.tolist()):
        out.writerow([t, repr(v)])


# --------------------------------------------------------------------- synthesis


@dataclass(frozen=True)
class SynthesisSpec:
    """Shape of the synthetic daily-seasonal workload.

    Value at minute t is ``A(day) * S(t mod 1440) + noise`` clipped at 0, with
    ``S(m) = level + a24*cos(2pi(m - peak24)/1440) + a12*cos(4pi(m - peak12)/1440)``.
    The day amplitude ``A`` follows a slow sinusoid over ``drift_period_days``
    plus optional seeded day-to-day jitter.
    """

    level: float = 0.45
    amp_24h: float = 0.35
    peak_24h_minute: float = 840.0
    amp_12h: float = 0.08
    peak_12h_minute: float = 660.0
    drift_amplitude: float = 0.1
    drift_period_days: float = 7.0
    drift_phase: float = 0.0
    day_jitter: float = 0.0
    noise_std: float = 0.05

    def __post_init__(self) -> None:
        if self.level <= abs(self.amp_24h) + abs(self.amp_12h):
            raise ValueError("daily profile must be strictly positive: level > |amp_24h| + |amp_12h|")
        if not 0 <= self.drift_amplitude < 1:
            raise ValueError("drift_amplitude must lie in [0, 1)")
        if self.drift_period_days <= 0:
            raise ValueError("drift_period_days must be positive")
        if self.noise_std < 0 or self.day_jitter < 0:
            raise ValueError("noise_std and day_jitter must be nonnegative")


def daily_profile(minute_of_day: np.ndarray, spec: SynthesisSpec) -> np.ndarray:
    m = np.asarray(minute_of_day, dtype=np.float64)
    w = 2.0 * np.pi / MINUTES_PER_DAY
    return (
        spec.level
        + spec.amp_24h * np.cos(w * (m - spec.peak_24h_minute))
        + spec.amp_12h * np.cos(2.0 * w * (m - spec.peak_12h_minute))
    )


def day_amplitudes(days: int, spec: SynthesisSpec, seed: int) -> np.ndarray:
    k = np.arange(days, dtype=np.float64)
    amp = 1.0 + spec.drift_amplitude * np.sin(
        2.0 * np.pi * k / spec.drift_period_days + spec.drift_phase
    )
    if spec.day_jitter:
        amp_rng, _ = _streams(seed)
        amp = amp * np.exp(spec.day_jitter * amp_rng.standard_normal(days))
    return amp


def _streams(seed: int) -> tuple[np.random.Generator, np.random.Generator]:
    amp_seq, noise_seq = np.random.SeedSequence(seed).spawn(2)
    return np.random.default_rng(amp_seq), np.random.default_rng(noise_seq)


def synthesize_workload(
    days: int = 10, spec: SynthesisSpec | None = None, seed: int = 0
) -> TimeSeries:
    """Deterministic synthetic 1-minute workload trace of ``days`` days.

    Values are multiples of SYNTH_RESOLUTION, like readings from a meter
    with finite resolution, which keeps trend/residual splits exact.
    """
    if days < 2:
        raise InsufficientSpan(f"need at least 2 days of data, got {days}")
    spec = spec or SynthesisSpec()
    minutes = np.arange(days * MINUTES_PER_DAY)
    clean = np.repeat(day_amplitudes(days, spec, seed), MINUTES_PER_DAY) * daily_profile(
        minutes % MINUTES_PER_DAY, spec
    )
    if spec.noise_std:
        _, noise_rng = _streams(seed)
        clean = clean + spec.noise_std * noise_rng.standard_normal(clean.size)
    clean = np.round(np.maximum(clean, 0.0) / SYNTH_RESOLUTION) * SYNTH_RESOLUTION
    return TimeSeries(0, clean)
