"""Benchmark: compiled fixation-scan kernel vs pure-Python fallback.

Usage: python benchmarks/bench_fixation.py [--samples N] [--repeats K]
"""

from __future__ import annotations

import argparse
import random
import statistics
import sys
import time
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "tests"))

from oracles import synth_trajectory  # noqa: E402

from gazestream.fixation._scan_py import scan_intervals as scan_python  # noqa: E402

try:
    from gazestream.fixation._scan import scan_intervals as scan_compiled
except ImportError:
    scan_compiled = None


def bench(fn, batches, repeats):
    times = []
    for _ in range(repeats):
        start = time.perf_counter()
        for x, y, t, v in batches:
            fn(x, y, t, v, 32.0, 0.3, 0.2)
        times.append(time.perf_counter() - start)
    return min(times), statistics.mean(times)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--trajectories", type=int, default=100)
    ap.add_argument("--samples", type=int, default=300)
    ap.add_argument("--repeats", type=int, default=5)
    args = ap.parse_args()

    rng = random.Random(123)
    batches = []
    for _ in range(args.trajectories):
        x, y, t, v = synth_trajectory(rng, max_samples=args.samples)
        batches.append((x, y, t, v.astype(np.uint8)))
    total = sum(len(b[0]) for b in batches)
    print(f"{args.trajectories} trajectories, {total} samples total, best of {args.repeats}")

    py_best, py_mean = bench(scan_python, batches, args.repeats)
    print(f"pure python : best {py_best * 1e3:8.2f} ms  mean {py_mean * 1e3:8.2f} ms")

    if scan_compiled is None:
        print("compiled    : not built (pip install -e . rebuilds it)")
        return

    c_best, c_mean = bench(scan_compiled, batches, args.repeats)
    print(f"compiled    : best {c_best * 1e3:8.2f} ms  mean {c_mean * 1e3:8.2f} ms")
    print(f"speedup     : {py_best / c_best:6.1f}x")

    for x, y, t, v in batches:
        assert scan_python(x, y, t, v, 32.0, 0.3, 0.2) == scan_compiled(x, y, t, v, 32.0, 0.3, 0.2)
    print("outputs bit-equal across backends")


if __name__ == "__main__":
    main()
