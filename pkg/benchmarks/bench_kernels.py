"""Timed comparison of the numba and numpy backend kernels.

Runs each hot kernel (divided-difference assembly, PSD feasibility
projections, probe ratio batches, polar ascent) at a few grid sizes and
prints per-kernel timings with the numba speedup. Numba compilation is
excluded by a warmup call before timing.

Usage: python3 benchmarks/bench_kernels.py [--sizes 16,32,64] [--repeat 5]
"""

import argparse
import time

import numpy as np

from traceshift import backends
from traceshift.circlefn import builtin_circle_function, random_trig_poly
from traceshift.multiplier import divided_difference_kernel, half_step_grid


def workloads(n, seed=0):
    rng = np.random.default_rng(seed)
    f = random_trig_poly(8, seed + 1)
    grid = half_step_grid(n)
    z = np.exp(1j * grid)
    phi = np.ascontiguousarray(
        divided_difference_kernel(builtin_circle_function("abs-theta"), grid).values
    )
    probes = (rng.standard_normal((32, n, n)) + 1j * rng.standard_normal((32, n, n)))
    t0 = np.ascontiguousarray(probes[0])
    x = np.linspace(-1.5, 1.5, n)
    return {
        "trig_dd_grid": lambda impl: impl.trig_dd_grid(f.coeffs, z, z),
        "poly_dd_grid": lambda impl: impl.poly_dd_grid(np.arange(9, dtype=complex), x, x),
        "psd_feasibility": lambda impl: impl.psd_feasibility(phi, 1.9, 400, 1e-9),
        "probe_ratio_batch": lambda impl: impl.probe_ratio_batch(phi, probes),
        "polar_ascent": lambda impl: impl.polar_ascent(phi, t0, 40),
    }


def best_time(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        start = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - start)
    return best


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--sizes", default="16,32,64")
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()
    sizes = [int(s) for s in args.sizes.split(",")]

    ref = backends.load("numpy")
    try:
        fast = backends.load("numba")
    except ImportError:
        fast = None
        print("numba unavailable: timing the numpy backend only")

    for n in sizes:
        print(f"\nn = {n}")
        loads = workloads(n)
        for name, call in loads.items():
            t_np = best_time(lambda: call(ref), args.repeat)
            if fast is None:
                print(f"  {name:18s} numpy {t_np * 1e3:9.3f} ms")
                continue
            call(fast)  # warmup: trigger compilation outside the timer
            t_nb = best_time(lambda: call(fast), args.repeat)
            speed = t_np / t_nb if t_nb > 0 else float("inf")
            print(f"  {name:18s} numpy {t_np * 1e3:9.3f} ms   "
                  f"numba {t_nb * 1e3:9.3f} ms   x{speed:.2f}")


if __name__ == "__main__":
    main()
