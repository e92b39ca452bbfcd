"""Benchmark the compiled overlap kernel against the numpy fallback.

Run:  python3 benchmarks/bench_overlap.py
"""

import time

import numpy as np

from tfim_cluster import _overlap_py, make_rng

try:
    from tfim_cluster import _overlap_cy
except ImportError:
    _overlap_cy = None


def bench(impl, cases, repeats=20):
    t0 = time.perf_counter()
    acc = 0.0
    for _ in range(repeats):
        for ix, fx, iy, fy, a, b in cases:
            acc += impl.overlap_merged(ix, fx, iy, fy, a, b)
    return (time.perf_counter() - t0) / (repeats * len(cases)), acc


def main():
    rng = make_rng(2024)
    cases = []
    for _ in range(2000):
        nx, ny = rng.poisson(8), rng.poisson(8)
        fx = np.sort(rng.uniform(0.0, 4.0, nx))
        fy = np.sort(rng.uniform(0.0, 4.0, ny))
        ix = 1.0 if rng.random() < 0.5 else -1.0
        iy = 1.0 if rng.random() < 0.5 else -1.0
        cases.append((ix, fx, iy, fy, 0.0, 4.0))

    t_py, acc_py = bench(_overlap_py, cases)
    print("numpy fallback : %8.2f ns/call" % (t_py * 1e9))
    if _overlap_cy is None:
        print("compiled kernel: not built")
        return
    t_cy, acc_cy = bench(_overlap_cy, cases)
    print("compiled kernel: %8.2f ns/call  (speedup %.1fx)"
          % (t_cy * 1e9, t_py / t_cy))
    assert abs(acc_py - acc_cy) < 1e-9 * max(1.0, abs(acc_py))


if __name__ == "__main__":
    main()
