import numpy as np
import pytest

from trendcast.algebraic_estimator import build_degree1_kernels, trend_series
from trendcast.errors import InvalidCapacity
from trendcast.forecasters import batch_forecast
from trendcast.provisioning import (
    capacity_for_utilization,
    predict_vm_count,
    provision_series,
    rescale_to_cpu_millis,
    write_plans_csv,
)
from trendcast.series_core import TimeSeries


class TestRescale:
    def test_examples(self):
        assert rescale_to_cpu_millis(1.0) == (5e6, False)
        assert rescale_to_cpu_millis(0.0) == (0.0, False)
        assert rescale_to_cpu_millis(-0.01) == (0.0, True)

    def test_array(self):
        z, clamped = rescale_to_cpu_millis(np.array([0.5, -1.0]), 2.0)
        assert z.tolist() == [1.0, 0.0] and clamped.tolist() == [False, True]


class TestVmCount:
    @pytest.mark.parametrize("z,cont,n", [(60000, 2.0, 2), (61000, 61000 / 30000, 3), (0, 0.0, 1)])
    def test_examples(self, z, cont, n):
        assert predict_vm_count(z, 30000) == (cont, n)

    def test_capacity(self):
        assert capacity_for_utilization(0.5) == 30000
        with pytest.raises(InvalidCapacity):
            predict_vm_count(1.0, 0)


class TestProvisionSeries:
    def test_constant(self):
        plans = provision_series(TimeSeries(0, np.full(3 * 1440, 0.006)))
        assert plans
        assert all(p.z_hat == pytest.approx(30000) and p.n_vm == 1 for p in plans)

    def test_homogeneous_in_scale(self, synth10):
        a = provision_series(synth10)
        b = provision_series(synth10, scale_factor=1e7)
        for p, q in zip(a, b):
            assert q.z_hat == pytest.approx(2 * p.z_hat, rel=1e-12)
            assert q.n_vm_continuous == pytest.approx(2 * p.n_vm_continuous, rel=1e-12)

    def test_one_plan_per_origin(self, synth10):
        plans = provision_series(synth10, "mixed", 30)
        fc = batch_forecast(synth10, "mixed", 30)
        assert [p.origin_t for p in plans] == fc.origins.tolist()
        assert all(p.horizon_h == 30 for p in plans)

    def test_tracks_daily_shape(self, synth10):
        # z is a monotone map of the forecast, so the daily peak is at the same minute
        plans = provision_series(synth10)
        day = [p for p in plans if 5 * 1440 <= p.origin_t + 30 < 6 * 1440]
        cont = np.array([p.n_vm_continuous for p in day])
        z = np.array([p.z_hat for p in day])
        assert np.argmax(cont) == np.argmax(z)
        trend = trend_series(synth10, build_degree1_kernels(60))
        targets = np.array([p.origin_t + 30 for p in day])
        assert abs(targets[np.argmax(cont)] - targets[np.argmax(trend.trend[trend.positions(targets)])]) <= 60

    def test_csv(self, tmp_path):
        plans = provision_series(TimeSeries(0, np.full(3 * 1440, 0.012)))
        p = tmp_path / "p.csv"
        write_plans_csv(plans, p)
        rows = p.read_text().splitlines()
        assert rows[0] == "origin_t,z_hat_ms,n_vm_continuous,n_vm"
        assert rows[1].endswith(",2") and len(rows) == len(plans) + 1
