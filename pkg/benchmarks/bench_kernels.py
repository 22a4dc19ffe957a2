"""Time the numba and numpy paths of the hot kernels side by side.

    python benchmarks/bench_kernels.py [--repeat 5] [--points 200000]

Both paths are timed in one process through the ``use_numba`` switch; the
first numba call is a warm-up so compile time is excluded. Results for both
paths are compared before timing.
"""

import argparse
import math
import time

import numpy as np

from rentscrape import kernels


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        start = time.perf_counter()
        fn()
        times.append(time.perf_counter() - start)
    return min(times)


def ring_case(rng, points, vertices):
    angles = np.sort(rng.uniform(0, 2 * math.pi, vertices))
    radii = rng.uniform(0.6, 1.0, vertices)
    rx = np.append(radii * np.cos(angles), radii[0] * np.cos(angles[0]))
    ry = np.append(radii * np.sin(angles), radii[0] * np.sin(angles[0]))
    px = rng.uniform(-1.1, 1.1, points)
    py = rng.uniform(-1.1, 1.1, points)
    return (px, py, rx, ry)


def kde_case(rng, points, grid_points):
    data = np.sort(rng.lognormal(0.3, 0.5, points))
    grid = np.linspace(data[0], data[-1], grid_points)
    return (data, grid, 0.05)


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    parser.add_argument("--points", type=int, default=200_000)
    parser.add_argument("--vertices", type=int, default=200)
    parser.add_argument("--grid", type=int, default=512)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args(argv)

    if not kernels.NUMBA_AVAILABLE:
        print("numba is not available (or RENTSCRAPE_NO_NUMBA is set); only the numpy path can run")

    rng = np.random.default_rng(args.seed)
    cases = [
        ("ring_classify", kernels.ring_classify, ring_case(rng, args.points, args.vertices)),
        ("gaussian_kde", kernels.gaussian_kde, kde_case(rng, args.points, args.grid)),
    ]
    print(f"{'kernel':<15}{'numpy s':>10}{'numba s':>10}{'speedup':>9}")
    for name, fn, case in cases:
        t_np = best_of(lambda: fn(*case, use_numba=False), args.repeat)
        if kernels.NUMBA_AVAILABLE:
            a = fn(*case, use_numba=True)  # warm-up, compiles on first call
            b = fn(*case, use_numba=False)
            same = np.array_equal(a, b) if a.dtype.kind == "i" else np.allclose(a, b, rtol=1e-12, atol=0)
            if not same:
                raise SystemExit(f"{name}: numba and numpy results differ")
            t_nb = best_of(lambda: fn(*case, use_numba=True), args.repeat)
            print(f"{name:<15}{t_np:>10.4f}{t_nb:>10.4f}{t_np / t_nb:>8.1f}x")
        else:
            print(f"{name:<15}{t_np:>10.4f}{'-':>10}{'-':>9}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
