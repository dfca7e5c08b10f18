"""Compare the numba and numpy sliding-window backends.

    python benchmarks/bench_kernels.py --samples 14400 144000 --windows 60 120
"""

from __future__ import annotations

import argparse
import timeit

import numpy as np

from trendcast import _kernels
from trendcast.algebraic_estimator import build_degree1_kernels


def bench(fn, x, w0, w1, repeat: int) -> float:
    fn(x, w0, w1)  # warm-up, includes JIT compilation
    return min(timeit.repeat(lambda: fn(x, w0, w1), number=1, repeat=repeat))


def main(argv: list[str] | None = None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    ap.add_argument("--samples", type=int, nargs="+", default=[14_400, 144_000, 1_440_000])
    ap.add_argument("--windows", type=int, nargs="+", default=[60, 120])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)

    backends = {"numpy": _kernels.sliding_dot2_numpy}
    if _kernels.sliding_dot2_numba is not None:
        backends["numba"] = _kernels.sliding_dot2_numba
    else:
        print("numba unavailable; timing numpy only")

    rng = np.random.default_rng(0)
    print(f"{'samples':>10} {'window':>7} " + " ".join(f"{b + ' ms':>10}" for b in backends)
          + f" {'speedup':>8}")
    for n in args.samples:
        x = rng.random(n)
        for T in args.windows:
            w0, w1 = (k.weights for k in build_degree1_kernels(T))
            times = {b: bench(fn, x, w0, w1, args.repeat) for b, fn in backends.items()}
            ref = backends["numpy"](x, w0, w1)
            for b, fn in backends.items():
                np.testing.assert_allclose(fn(x, w0, w1)[0], ref[0], rtol=1e-9, atol=1e-12)
            speedup = times["numpy"] / times["numba"] if "numba" in times else float("nan")
            print(f"{n:>10} {T:>7} " + " ".join(f"{t * 1e3:>10.2f}" for t in times.values())
                  + f" {speedup:>7.1f}x")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
