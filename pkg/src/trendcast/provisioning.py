"""Turning a normalized load forecast into CPU time and a virtual-machine count."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .algebraic_estimator import DEFAULT_CENTERED_WINDOW, DEFAULT_WINDOW
from .errors import InvalidCapacity
from .forecasters import Method, batch_forecast
from .series_core import TimeSeries, text_sink

DEFAULT_SCALE_FACTOR = 5e6
# one vCPU kept at 50% busy: half of the 60000 CPU-ms in a minute
DEFAULT_CAPACITY_MS = 30000.0
DEFAULT_PROVISION_HORIZON = 30
MS_PER_MINUTE = 60000.0


def capacity_for_utilization(utilization: float) -> float:
    """Per-VM CPU-ms per minute at the given target utilization (0.5 -> 30000)."""
    if not 0 < utilization <= 1:
        raise InvalidCapacity(f"utilization must lie in (0, 1], got {utilization}")
    return MS_PER_MINUTE * utilization


@dataclass(frozen=True)
class ProvisionPlan:
    origin_t: int
    horizon_h: int
    z_hat: float
    n_vm_continuous: float
    n_vm: int
    per_vm_capacity_ms: float = DEFAULT_CAPACITY_MS
    scale_factor: float = DEFAULT_SCALE_FACTOR
    clamped: bool = False


def rescale_to_cpu_millis(y_hat, scale_factor: float = DEFAULT_SCALE_FACTOR):
    """CPU-ms per minute from a normalized forecast; returns ``(z, clamped)``.

    Negative forecasts are clamped to zero and flagged.  Works on scalars and
    arrays alike.
    """
    y = np.asarray(y_hat, dtype=np.float64)
    clamped = y < 0
    z = scale_factor * np.where(clamped, 0.0, y)
    if z.ndim == 0:
        return float(z), bool(clamped)
    return z, clamped


def predict_vm_count(z_hat, per_vm_capacity_ms: float = DEFAULT_CAPACITY_MS):
    """``(continuous, integer)`` VM need; the integer is ``max(1, ceil(continuous))``."""
    if not per_vm_capacity_ms > 0:
        raise InvalidCapacity(f"per-VM capacity must be positive, got {per_vm_capacity_ms}")
    z = np.asarray(z_hat, dtype=np.float64)
    if np.any(z < 0):
        raise ValueError("z_hat must be nonnegative")
    continuous = z / per_vm_capacity_ms
    count = np.maximum(1, np.ceil(continuous)).astype(np.int64)
    if continuous.ndim == 0:
        return float(continuous), int(count)
    return continuous, count


def provision_series(
    series: TimeSeries,
    method: Method | str = Method.MIXED,
    h: int = DEFAULT_PROVISION_HORIZON,
    *,
    scale_factor: float = DEFAULT_SCALE_FACTOR,
    per_vm_capacity_ms: float = DEFAULT_CAPACITY_MS,
    window: int = DEFAULT_WINDOW,
    centered_window: int = DEFAULT_CENTERED_WINDOW,
    allow_long_horizon: bool = False,
) -> list[ProvisionPlan]:
    """One plan per valid origin of the chosen forecaster."""
    if not per_vm_capacity_ms > 0:
        raise InvalidCapacity(f"per-VM capacity must be positive, got {per_vm_capacity_ms}")
    fc = batch_forecast(
        series, method, h, window=window, centered_window=centered_window,
        allow_long_horizon=allow_long_horizon,
    )
    z, clamped = rescale_to_cpu_millis(fc.predicted, scale_factor)
    cont, count = predict_vm_count(z, per_vm_capacity_ms)
    return [
        ProvisionPlan(t, fc.horizon_h, zi, ci, ni, per_vm_capacity_ms, scale_factor, cl)
        for t, zi, ci, ni, cl in zip(
            fc.origins.tolist(), z.tolist(), cont.tolist(), count.tolist(), clamped.tolist()
        )
    ]


def write_plans_csv(plans, path: str | Path) -> None:
    with text_sink(path) as fh:
        out = csv.writer(fh, lineterminator="\n")
        out.writerow(["origin_t", "z_hat_ms", "n_vm_continuous", "n_vm"])
        for p in plans:
            out.writerow([p.origin_t, repr(p.z_hat), repr(p.n_vm_continuous), p.n_vm])
