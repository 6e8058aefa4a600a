"""Time the compiled kernels against the numpy fallback.

    python3 benchmarks/bench_kernels.py [--repeat 5] [--sizes 64 256 512]

Each kernel runs on identical inputs with both backends; the script checks
that the outputs agree before printing timings.
"""

from __future__ import annotations

import argparse
import timeit

import numpy as np

from holosynth import kernels


def _best(fn, repeat: int) -> float:
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def bench_median(size: int, kernel: int, repeat: int, rng) -> tuple[float, float]:
    img = rng.random((size, size))
    py = kernels.python_backend.median2d_argmedian
    cy = kernels.compiled_backend.median2d_argmedian
    a, b = py(img, kernel), cy(img, kernel)
    assert np.array_equal(a[0], b[0]) and np.array_equal(a[1], b[1]), "median backends disagree"
    return _best(lambda: py(img, kernel), repeat), _best(lambda: cy(img, kernel), repeat)


def bench_points(size: int, npoints: int, repeat: int, rng) -> tuple[float, float]:
    pitch, wl = 3.74e-3, 532e-6
    xs = (np.arange(size) - size // 2) * pitch
    pts = np.column_stack([rng.uniform(-0.1, 0.1, npoints), rng.uniform(-0.1, 0.1, npoints),
                           rng.uniform(1.0, 2.0, npoints)])
    amp, ph = rng.random(npoints), rng.uniform(0, 2 * np.pi, npoints)
    py = kernels.python_backend.pointsource_field
    cy = kernels.compiled_backend.pointsource_field
    a, b = py(xs, xs, pts, amp, ph, wl), cy(xs, xs, pts, amp, ph, wl)
    assert np.allclose(a, b, rtol=1e-9, atol=1e-9 * np.abs(a).max()), "point-source backends disagree"
    return _best(lambda: py(xs, xs, pts, amp, ph, wl), repeat), _best(lambda: cy(xs, xs, pts, amp, ph, wl), repeat)


def main(argv=None) -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    parser.add_argument("--sizes", type=int, nargs="+", default=[64, 256, 512])
    parser.add_argument("--points", type=int, default=200)
    args = parser.parse_args(argv)
    if kernels.compiled_backend is None:
        raise SystemExit("compiled extension not built; reinstall without HOLOSYNTH_NO_EXT")

    rng = np.random.default_rng(0)
    print(f"{'kernel':<26}{'numpy [ms]':>12}{'cython [ms]':>13}{'speedup':>10}")
    for n in args.sizes:
        for k in (3, 5):
            py, cy = bench_median(n, k, args.repeat, rng)
            print(f"{f'median {n}x{n} k={k}':<26}{py * 1e3:12.2f}{cy * 1e3:13.2f}{py / cy:10.1f}x")
    for n in args.sizes:
        py, cy = bench_points(n, args.points, args.repeat, rng)
        print(f"{f'points {n}x{n} P={args.points}':<26}{py * 1e3:12.2f}{cy * 1e3:13.2f}{py / cy:10.1f}x")


if __name__ == "__main__":
    main()
