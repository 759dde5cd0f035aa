#!/usr/bin/env python3
"""Benchmark the click-sampling kernels: compiled extension vs NumPy fallback.

Both backends are bit-identical by contract; this script measures the
speed difference and double-checks equality on every workload.

    python benchmarks/kernel_benchmark.py --photons 2000000 --repeat 5
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from edcsim.kernels import available_backends

WORKLOADS = {
    "uniform_4way": np.array([0.25, 0.5, 0.75, 1.0]),
    "bench_td_0.3": np.array([0.2346, 0.8346, 0.9173, 1.0]),
    "two_detector": np.array([0.25, 1.0, 1.0, 1.0]),
    "single_port": np.array([0.0, 1.0, 1.0, 1.0]),
}


def best_of(fn, repeat: int) -> float:
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--photons", type=int, default=2_000_000)
    parser.add_argument("--repeat", type=int, default=5)
    parser.add_argument("--seed", type=int, default=42)
    args = parser.parse_args()

    backends = available_backends()
    print(f"backends: {', '.join(backends)}   photons per call: {args.photons:,}")
    if "cython" not in backends:
        print("note: compiled kernel not built; showing the fallback only")

    header = f"{'workload':<14}" + "".join(f"{name:>15}" for name in backends)
    if len(backends) > 1:
        header += f"{'speedup':>10}"
    print(header)
    print("-" * len(header))

    for label, cum in WORKLOADS.items():
        results = {}
        rates = {}
        for name, module in backends.items():
            fn = lambda m=module: m.sample_counts(cum, 0, args.photons, args.seed)
            results[name] = fn()
            rates[name] = args.photons / best_of(fn, args.repeat)
        values = list(results.values())
        assert all(np.array_equal(values[0], v) for v in values[1:]), f"backends disagree on {label}"
        row = f"{label:<14}" + "".join(f"{rates[name] / 1e6:>11.1f} M/s" for name in backends)
        if len(backends) > 1:
            row += f"{rates['cython'] / rates['python']:>9.1f}x"
        print(row)

    print("all workloads produced identical counts across backends")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
