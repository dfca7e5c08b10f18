import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from trendcast import _kernels

needs_numba = pytest.mark.skipif(_kernels.sliding_dot_numba is None, reason="numba unavailable")


def _naive(x, w):
    return np.array([sum(w[i] * x[j + i] for i in range(w.size)) for j in range(x.size - w.size + 1)])


finite = st.floats(-1e6, 1e6, allow_nan=False)


@settings(max_examples=60, deadline=None)
@given(x=arrays(np.float64, st.integers(1, 80), elements=finite),
       w=arrays(np.float64, st.integers(1, 12), elements=st.floats(-10, 10)))
def test_numpy_matches_naive_sum(x, w):
    got = _kernels.sliding_dot_numpy(x, w)
    if x.size < w.size:
        assert got.size == 0
    else:
        np.testing.assert_allclose(got, _naive(x, w), rtol=1e-9, atol=1e-6)


@needs_numba
@settings(max_examples=60, deadline=None)
@given(x=arrays(np.float64, st.integers(1, 80), elements=finite),
       w0=arrays(np.float64, 7, elements=st.floats(-10, 10)),
       w1=arrays(np.float64, 7, elements=st.floats(-10, 10)))
def test_backends_agree(x, w0, w1):
    a0, a1 = _kernels.sliding_dot2_numpy(x, w0, w1)
    b0, b1 = _kernels.sliding_dot2_numba(x, w0, w1)
    np.testing.assert_allclose(a0, b0, rtol=1e-9, atol=1e-6)
    np.testing.assert_allclose(a1, b1, rtol=1e-9, atol=1e-6)
    np.testing.assert_allclose(_kernels.sliding_dot_numba(x, w0), a0, rtol=1e-9, atol=1e-6)


@needs_numba
def test_default_backend_is_numba():
    assert _kernels.BACKEND == "numba"
    assert _kernels.sliding_dot2 is _kernels.sliding_dot2_numba


@pytest.mark.parametrize("flag,expected", [("1", "numpy"), ("0", None), ("", None)])
def test_env_flag_selects_backend(flag, expected):
    env = dict(os.environ, TRENDCAST_NO_NUMBA=flag)
    out = subprocess.run(
        [sys.executable, "-c", "from trendcast import _kernels; print(_kernels.BACKEND)"],
        env=env, capture_output=True, text=True, check=True,
    ).stdout.strip()
    assert out == (expected or _kernels.BACKEND)


def test_pipeline_agrees_across_backends():
    code = (
        "from trendcast import *;"
        "r = build_comparison_table(synthesize_workload(4, seed=2), [30]);"
        "print(repr(r.cell('mixed', 30).sse))"
    )
    runs = [
        float(subprocess.run([sys.executable, "-c", code], capture_output=True, text=True,
                             check=True, env=dict(os.environ, TRENDCAST_NO_NUMBA=f)).stdout)
        for f in ("1", "0")
    ]
    assert runs[0] == pytest.approx(runs[1], rel=1e-9)


def test_benchmark_script_runs():
    script = os.path.join(os.path.dirname(__file__), "..", "benchmarks", "bench_kernels.py")
    out = subprocess.run([sys.executable, script, "--samples", "2000", "--windows", "60",
                          "--repeat", "1"], capture_output=True, text=True, check=True).stdout
    assert "2000" in out.splitlines()[-1]
