"""Time the numpy and numba kernel backends on representative workloads.

    python benchmarks/bench_kernels.py [--repeat N] [--json out.json]
"""

import argparse
import json
import platform
import time

import numpy as np

from cmpkit.kernels import numba_impl, numpy_impl


def workloads():
    rng = np.random.default_rng(0)
    half = np.array([0.305e-3, 3.045e-3, 1.91e-3])
    pts = rng.uniform(-0.99, 0.99, (200_000, 3)) * half

    n_field, n_freq = 201, 401
    freqs = np.linspace(0.5, 12.0, n_freq)
    centers = np.column_stack([np.full(n_field, 1.38), np.linspace(1.0, 4.0, n_field),
                               np.linspace(5.0, 9.0, n_field)])
    widths = np.full_like(centers, 0.15)
    weights = np.ones_like(centers)
    grid = numpy_impl.lorentzian_grid(centers, widths, weights, freqs)
    db = 20 * np.log10(grid + 1e-4)

    return {
        "demag_tensor_points (200k points)": lambda impl: impl.demag_tensor_points(pts, half),
        "lorentzian_grid (201x401x3)": lambda impl: impl.lorentzian_grid(centers, widths, weights,
                                                                          freqs),
        "column_peaks (201x401)": lambda impl: impl.column_peaks(db, freqs, -40.0),
    }


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--json", help="write timings to this file")
    args = ap.parse_args(argv)

    results = []
    for name, job in workloads().items():
        row = {"kernel": name, "numpy_s": best_of(lambda: job(numpy_impl), args.repeat)}
        if numba_impl is not None:
            t0 = time.perf_counter()
            job(numba_impl)  # compile, or load from cache
            row["numba_first_call_s"] = time.perf_counter() - t0
            row["numba_s"] = best_of(lambda: job(numba_impl), args.repeat)
            row["speedup"] = row["numpy_s"] / row["numba_s"]
        results.append(row)

    print(f"python {platform.python_version()}, numpy {np.__version__}, "
          f"numba {'absent' if numba_impl is None else 'present'}")
    print(f"{'kernel':36s} {'numpy [ms]':>11s} {'numba [ms]':>11s} {'speedup':>8s}")
    for row in results:
        nb = f"{1e3 * row['numba_s']:11.2f}" if "numba_s" in row else f"{'-':>11s}"
        sp = f"{row['speedup']:8.1f}" if "speedup" in row else f"{'-':>8s}"
        print(f"{row['kernel']:36s} {1e3 * row['numpy_s']:11.2f} {nb} {sp}")
    if args.json:
        with open(args.json, "w") as fh:
            json.dump(results, fh, indent=2)


if __name__ == "__main__":
    main()
