"""Time the numba kernels against their numpy fallbacks.

    python benchmarks/bench_kernels.py [--videos 10000] [--per-video 90] [--repeats 5]

Both backends live in the same process (the numba versions are the
``*_numba`` names in ``memdecay.kernels``), so the comparison needs no
environment flag. Results are checked for bit equality before timing.
"""

import argparse
import time

import numpy as np

from memdecay import kernels
from memdecay._accel import NUMBA_AVAILABLE


def best_of(fn, repeats):
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--videos", type=int, default=10_000)
    ap.add_argument("--per-video", type=int, default=90)
    ap.add_argument("--repeats", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    if not NUMBA_AVAILABLE:
        raise SystemExit("numba is not available (or MEMDECAY_DISABLE_NUMBA is set); nothing to compare")

    rng = np.random.default_rng(args.seed)
    n = args.videos * args.per_video
    codes = rng.integers(0, args.videos, n)
    lags = rng.integers(9, 201, n)
    responses = (rng.random(n) < 0.7).astype(np.int64)
    moments = kernels.group_moments_numpy(codes, lags, responses, 80, args.videos)
    scores = rng.random(args.videos).round(2)  # rounding forces ties

    cases = {
        "group_moments": (
            lambda: kernels.group_moments_numba(codes, lags, responses, 80, args.videos),
            lambda: kernels.group_moments_numpy(codes, lags, responses, 80, args.videos),
        ),
        "descend (10 passes)": (
            lambda: kernels.descend_numba(moments, -5e-4, 10, 0.0),
            lambda: kernels.descend_numpy(moments, -5e-4, 10, 0.0),
        ),
        "descend (tol 1e-12)": (
            lambda: kernels.descend_numba(moments, -5e-4, 100_000, 1e-12),
            lambda: kernels.descend_numpy(moments, -5e-4, 100_000, 1e-12),
        ),
        "midranks": (
            lambda: kernels.midranks_numba(scores),
            lambda: kernels.midranks_numpy(scores),
        ),
    }

    print(f"{n:,} records over {args.videos:,} videos; best of {args.repeats}")
    print(f"{'kernel':<22s}{'numba (ms)':>12s}{'numpy (ms)':>12s}{'speed-up':>10s}")
    for name, (fast, slow) in cases.items():
        a, b = fast(), slow()  # also triggers compilation
        for x, y in zip(a if isinstance(a, tuple) else (a,), b if isinstance(b, tuple) else (b,)):
            assert np.array_equal(x, y), f"{name}: backends disagree"
        t_fast, t_slow = best_of(fast, args.repeats), best_of(slow, args.repeats)
        print(f"{name:<22s}{1e3 * t_fast:12.2f}{1e3 * t_slow:12.2f}{t_slow / t_fast:9.1f}x")


if __name__ == "__main__":
    main()
