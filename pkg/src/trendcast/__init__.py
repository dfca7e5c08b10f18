"""Trend forecasting for cloud workload series and VM capacity planning."""

from .algebraic_estimator import (
    Alignment,
    FilterKernel,
    KernelPair,
    Target,
    TrendSeries,
    build_degree1_kernels,
    decompose,
    estimate_derivative_centered,
    estimate_trend,
    trend_series,
)
from .evaluation import (
    INFINITE_SNR,
    EvaluationReport,
    MethodScores,
    build_comparison_table,
    gain_vs_reference,
    snr_db,
    sse,
)
from .forecasters import (
    ForecastRequest,
    ForecastSeries,
    Method,
    batch_forecast,
    forecast_algebraic,
    forecast_mixed,
    forecast_persistence,
    forecast_scaled_persistence,
)
from .provisioning import (
    ProvisionPlan,
    predict_vm_count,
    provision_series,
    rescale_to_cpu_millis,
)
from .series_core import (
    SamplingSpec,
    SynthesisSpec,
    TimeSeries,
    ingest_csv,
    normalize_max,
    synthesize_workload,
    window,
    write_csv,
)

__version__ = "0.1.0"
