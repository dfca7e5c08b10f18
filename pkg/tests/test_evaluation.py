import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from trendcast.algebraic_estimator import TrendSeries, build_degree1_kernels, trend_series
from trendcast.errors import EmptyEvaluationRange, PerfectForecast
from trendcast.evaluation import (
    INFINITE_SNR,
    build_comparison_table,
    format_table,
    gain_vs_reference,
    snr_db,
    sse,
)
from trendcast.forecasters import ForecastSeries
from trendcast.series_core import SynthesisSpec, TimeSeries, synthesize_workload

# printed comparison table: (h, Pe, Al, Mi, Al gain, Mi gain)
PRINTED = [
    (5, 15.12, 12.47, 10.49, 21.21, 44.17),
    (30, 32.23, 65.68, 27.89, -50.862, 15.56),
    (60, 53.49, 153.79, 49.04, -65.21, 9.08),
]


class TestSse:
    def test_identity(self):
        ref = TrendSeries.from_values(np.arange(10.0))
        fc = ForecastSeries(np.arange(5), 2, "persistence", np.arange(2.0, 7.0))
        assert sse(fc, ref) == 0

    def test_arithmetic(self):
        ref = TrendSeries.from_values(np.zeros(10))
        fc = ForecastSeries([0, 1], 1, "persistence", [3.0, 4.0])
        assert sse(fc, ref) == 25

    def test_skips_targets_outside_reference(self):
        ref = TrendSeries.from_values(np.zeros(5))
        fc = ForecastSeries([2, 3, 4], 1, "persistence", [1.0, 1.0, 1.0])
        assert sse(fc, ref) == 2.0
        with pytest.raises(EmptyEvaluationRange):
            sse(ForecastSeries([10], 1, "persistence", [1.0]), ref)

    @settings(max_examples=50, deadline=None)
    @given(shift=st.integers(-10**6, 10**6), lam=st.floats(1e-3, 1e3))
    def test_shift_invariant_and_quadratic_in_scale(self, shift, lam):
        rng = np.random.default_rng(0)
        truth = rng.normal(size=50)
        pred = rng.normal(size=40)
        base = sse(ForecastSeries(np.arange(40), 3, "mixed", pred), TrendSeries.from_values(truth))
        moved = sse(ForecastSeries(np.arange(40) + shift, 3, "mixed", pred),
                    TrendSeries.from_values(truth, valid_from=shift))
        scaled = sse(ForecastSeries(np.arange(40), 3, "mixed", lam * pred),
                     TrendSeries.from_values(lam * truth))
        assert moved == base
        assert scaled == pytest.approx(lam**2 * base, rel=1e-9)


class TestGain:
    def test_printed_examples(self):
        assert gain_vs_reference(10.49, 15.12) == pytest.approx(44.14, abs=0.005)
        assert gain_vs_reference(153.79, 53.49) == pytest.approx(-65.22, abs=0.005)
        assert gain_vs_reference(7.0, 7.0) == 0

    @pytest.mark.parametrize("h,pe,al,mi,g_al,g_mi", PRINTED)
    def test_reproduces_printed_percentages(self, h, pe, al, mi, g_al, g_mi):
        assert gain_vs_reference(al, pe) == pytest.approx(g_al, abs=0.15)
        assert gain_vs_reference(mi, pe) == pytest.approx(g_mi, abs=0.15)

    def test_alternative_normalisation_rejected(self):
        # dividing by the reference SSE instead gives 17.5%, far from the printed 21.21%
        assert (15.12 - 12.47) / 15.12 * 100 == pytest.approx(17.5, abs=0.05)

    def test_perfect(self):
        with pytest.raises(PerfectForecast):
            gain_vs_reference(0.0, 1.0)


class TestSnr:
    def test_definition(self):
        tr = TrendSeries.from_values(np.full(4, 5.0))
        s = TimeSeries(0, [6.0, 4.0, 6.0, 4.0])
        assert snr_db(s, tr) == pytest.approx(10 * math.log10(100 / 4))

    def test_twenty_db(self):
        tr = TrendSeries.from_values([10.0, 0.0])
        s = TimeSeries(0, [10.0, 1.0])
        assert snr_db(s, tr) == pytest.approx(20.0)

    def test_infinite(self):
        tr = TrendSeries.from_values([1.0, 2.0])
        assert snr_db(TimeSeries(0, [1.0, 2.0]), tr) == INFINITE_SNR == math.inf

    def test_matches_generator(self):
        spec = SynthesisSpec(noise_std=0.05)
        s = synthesize_workload(10, spec, seed=6)
        clean = synthesize_workload(10, SynthesisSpec(noise_std=0.0), seed=6).values
        analytic = 10 * math.log10(np.mean(clean**2) / spec.noise_std**2)
        tr = trend_series(s, build_degree1_kernels(60))
        assert snr_db(s, tr) == pytest.approx(analytic, abs=1.0)


@pytest.fixture(scope="module")
def report():
    return build_comparison_table(synthesize_workload(10, seed=0))


class TestComparisonTable:
    def test_shape(self, report):
        assert len(report.scores) == 9
        assert report.horizons == (5, 30, 60)
        assert report.reference == "centered/60min"

    def test_ordering(self, report):
        for h in (5, 30, 60):
            assert report.cell("mixed", h).sse <= report.cell("scaled", h).sse
        assert report.cell("algebraic", 60).sse > report.cell("scaled", 60).sse

    def test_single_reference_cell(self, synth10):
        r = build_comparison_table(synth10, [30], ["scaled"])
        assert len(r.scores) == 1
        assert r.scores[0].gain_vs_reference_percent == 0

    def test_gain_uses_scaled_even_when_unlisted(self, synth10):
        full = build_comparison_table(synth10, [30], ["scaled", "mixed"])
        alone = build_comparison_table(synth10, [30], ["mixed"])
        assert alone.cell("mixed", 30) == full.cell("mixed", 30)

    def test_scale_invariant_gains(self, synth10):
        a = build_comparison_table(synth10, [5], ["scaled", "mixed"])
        b = build_comparison_table(synth10.with_values(synth10.values * 4.0), [5], ["scaled", "mixed"])
        assert b.cell("mixed", 5).sse == pytest.approx(16 * a.cell("mixed", 5).sse, rel=1e-9)
        assert b.cell("mixed", 5).gain_vs_reference_percent == pytest.approx(
            a.cell("mixed", 5).gain_vs_reference_percent, rel=1e-9)

    def test_raw_scoring_is_worse(self, synth10):
        hind = build_comparison_table(synth10, [5], ["mixed"])
        raw = build_comparison_table(synth10, [5], ["mixed"], score_against_raw=True)
        assert raw.reference == "raw"
        assert raw.cell("mixed", 5).sse > hind.cell("mixed", 5).sse

    def test_text_layout(self, report):
        text = format_table(report)
        header = text.splitlines()[1]
        assert header.split("  ")[0].strip() == "Prediction horizons"
        assert "Pe" in header and "Al [gain in %]" in header and "Mi [gain in %]" in header
        assert header.index("Pe") < header.index("Al [") < header.index("Mi [")
        assert any(line.startswith("t+5min") for line in text.splitlines())

    def test_csv(self, report, tmp_path):
        p = tmp_path / "r.csv"
        report.write_csv(p)
        rows = p.read_text().splitlines()
        assert rows[0] == "horizon,method,sse,gain_percent,snr_db"
        assert len(rows) == 10

    def test_too_short(self):
        with pytest.raises(EmptyEvaluationRange):
            build_comparison_table(TimeSeries(0, np.ones(1500)))
