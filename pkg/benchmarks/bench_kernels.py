"""Time the compiled kernels against the pure-Python fallback.

    python benchmarks/bench_kernels.py [--repeat 5] [--scale 1.0]

Both backends get identical inputs; the script also checks that their
outputs agree exactly before reporting timings.
"""

import argparse
import sys
import timeit

import numpy as np

from coref_meter import _kernels


def workloads(scale: float):
    rng = np.random.default_rng(0)
    n_win = int(200_000 * scale)
    windows = np.ascontiguousarray(rng.random((n_win, 3)))
    pos = np.sort(rng.integers(0, 1000, int(20_000 * scale)).astype(np.float64))
    neg = np.sort(rng.integers(0, 1000, int(20_000 * scale)).astype(np.float64))
    flips = rng.integers(0, 2, size=(int(2_000 * scale), 300), dtype=np.uint8)
    diffs = rng.normal(size=300)
    a = np.ascontiguousarray(rng.integers(0, 50, size=(300, 12)).astype(np.float64))
    b = np.ascontiguousarray(rng.integers(0, 50, size=(300, 12)).astype(np.float64))
    return {
        "window_stats": (windows,),
        "auc_halves": (pos, neg),
        "flip_mean_stats": (diffs, flips),
        "flip_f1_stats": (a, b, flips[: max(1, len(flips) // 10)]),
    }


def same(x, y) -> bool:
    if isinstance(x, np.ndarray):
        return np.array_equal(x, y)
    return x == y


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--scale", type=float, default=1.0)
    args = ap.parse_args(argv)

    if _kernels.compiled is None:
        print("compiled kernels unavailable; build with `pip install -e . --no-build-isolation`", file=sys.stderr)
        return 1

    print(f"{'kernel':<16} {'python s':>10} {'cython s':>10} {'speedup':>9}")
    for name, args_ in workloads(args.scale).items():
        py_fn, c_fn = getattr(_kernels.python, name), getattr(_kernels.compiled, name)
        if not same(py_fn(*args_), c_fn(*args_)):
            print(f"{name}: backends disagree", file=sys.stderr)
            return 1
        t_py = min(timeit.repeat(lambda: py_fn(*args_), number=1, repeat=args.repeat))
        t_c = min(timeit.repeat(lambda: c_fn(*args_), number=1, repeat=args.repeat))
        print(f"{name:<16} {t_py:>10.4f} {t_c:>10.4f} {t_py / t_c:>8.1f}x")
    return 0


if __name__ == "__main__":
    sys.exit(main())
