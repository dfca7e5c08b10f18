"""Sliding-window FIR application, the one hot loop in the package.

Two implementations share one contract: ``sliding_dot(x, w)[j] ==
sum(w[i] * x[j + i])`` for every full window.  The numba path is used when
numba imports and ``TRENDCAST_NO_NUMBA`` is unset (or ``0``); otherwise the
numpy path runs.  Results agree to rounding, not bitwise.
"""

from __future__ import annotations

import os

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view


def _flag_set(name: str) -> bool:
    return os.environ.get(name, "").strip().lower() not in ("", "0", "false", "no")


def sliding_dot_numpy(x: np.ndarray, w: np.ndarray) -> np.ndarray:
    x = np.ascontiguousarray(x, dtype=np.float64)
    w = np.ascontiguousarray(w, dtype=np.float64)
    if x.size < w.size:
        return np.empty(0, dtype=np.float64)
    return sliding_window_view(x, w.size) @ w


def sliding_dot2_numpy(x: np.ndarray, w0: np.ndarray, w1: np.ndarray):
    x = np.ascontiguousarray(x, dtype=np.float64)
    if x.size < w0.size:
        empty = np.empty(0, dtype=np.float64)
        return empty, empty.copy()
    view = sliding_window_view(x, w0.size)
    return view @ np.asarray(w0, dtype=np.float64), view @ np.asarray(w1, dtype=np.float64)


try:
    if _flag_set("TRENDCAST_NO_NUMBA"):
        raise ImportError("numba disabled by TRENDCAST_NO_NUMBA")
    from numba import njit
except ImportError:
    njit = None


if njit is not None:

    @njit(cache=True)
    def _sliding_dot_jit(x, w):
        n = x.size - w.size + 1
        if n <= 0:
            return np.empty(0, dtype=np.float64)
        out = np.empty(n, dtype=np.float64)
        L = w.size
        for j in range(n):
            acc = 0.0
            for i in range(L):
                acc += w[i] * x[j + i]
            out[j] = acc
        return out

    @njit(cache=True)
    def _sliding_dot2_jit(x, w0, w1):
        n = x.size - w0.size + 1
        if n <= 0:
            return np.empty(0, dtype=np.float64), np.empty(0, dtype=np.float64)
        out0 = np.empty(n, dtype=np.float64)
        out1 = np.empty(n, dtype=np.float64)
        L = w0.size
        for j in range(n):
            a0 = 0.0
            a1 = 0.0
            for i in range(L):
                v = x[j + i]
                a0 += w0[i] * v
                a1 += w1[i] * v
            out0[j] = a0
            out1[j] = a1
        return out0, out1

    def sliding_dot_numba(x: np.ndarray, w: np.ndarray) -> np.ndarray:
        return _sliding_dot_jit(
            np.ascontiguousarray(x, dtype=np.float64),
            np.ascontiguousarray(w, dtype=np.float64),
        )

    def sliding_dot2_numba(x: np.ndarray, w0: np.ndarray, w1: np.ndarray):
        return _sliding_dot2_jit(
            np.ascontiguousarray(x, dtype=np.float64),
            np.ascontiguousarray(w0, dtype=np.float64),
            np.ascontiguousarray(w1, dtype=np.float64),
        )

    BACKEND = "numba"
    sliding_dot = sliding_dot_numba
    sliding_dot2 = sliding_dot2_numba
else:
    sliding_dot_numba = None
    sliding_dot2_numba = None
    BACKEND = "numpy"
    sliding_dot = sliding_dot_numpy
    sliding_dot2 = sliding_dot2_numpy
