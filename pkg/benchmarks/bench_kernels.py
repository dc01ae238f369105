"""Time the SC and SCAN kernels on both backends and check they agree.

    python3 benchmarks/bench_kernels.py [--batch 4096] [--repeat 5]

The numba kernels decode one codeword at a time in compiled loops; the numpy
fallback (ST2DSIM_NUMBA=0) vectorizes over the batch instead.
"""

import argparse
import time

import numpy as np

from st2dsim import polar
from st2dsim._accel import _numba
from st2dsim.polar._kernels import sc_decode_batch, scan_decode_batch

CASES = [(16, 8), (64, 32), (128, 64)]


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--batch", type=int, default=4096)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    if _numba is None:
        print("numba not installed; only the numpy backend is available")
    rng = np.random.default_rng(0)
    print(f"{'kernel':6} {'N':>4} {'K':>4} {'numba us/cw':>12} {'numpy us/cw':>12} {'speedup':>8}  match")
    for n, k in CASES:
        code = polar.construct(n, k)
        frozen = code.frozen_mask
        llr = rng.normal(2.0, 2.0, size=(args.batch, n))
        kernels = {
            "sc": lambda nb: sc_decode_batch(llr, frozen, False, use_numba=nb),
            "scan": lambda nb: scan_decode_batch(llr, frozen, 1, False, use_numba=nb),
        }
        for name, run in kernels.items():
            t_np = best_of(lambda: run(False), args.repeat)
            if _numba is None:
                print(f"{name:6} {n:4d} {k:4d} {'-':>12} {1e6 * t_np / args.batch:12.2f} {'-':>8}")
                continue
            run(True)  # compile
            t_nb = best_of(lambda: run(True), args.repeat)
            a, b = run(True), run(False)
            same = all(np.allclose(x, y) for x, y in zip(a, b))
            print(f"{name:6} {n:4d} {k:4d} {1e6 * t_nb / args.batch:12.2f} {1e6 * t_np / args.batch:12.2f} "
                  f"{t_np / t_nb:8.1f}  {same}")


if __name__ == "__main__":
    main()
