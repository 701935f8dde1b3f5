"""Compare the compiled and numpy heatmap kernels.

Usage::

    python3 benchmarks/bench_kernels.py [--points N] [--bins B] [--sigma S] [--repeat R]

Reports the best-of-R wall time of binning and of the two-pass blur for
each available backend, and checks that both give the same grid.
"""
import argparse
import sys
import timeit

import numpy as np

from vecon import _pykernels
from vecon.heatmap import gaussian_kernel

try:
    from vecon import _ckernels
except ImportError:
    _ckernels = None


def blur(impl, counts, w):
    out = impl.convolve_rows(np.ascontiguousarray(counts), w)
    return impl.convolve_rows(np.ascontiguousarray(out.T), w).T


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--points", type=int, default=3358)
    ap.add_argument("--bins", type=int, default=1000)
    ap.add_argument("--sigma", type=float, default=8.0)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)

    rng = np.random.default_rng(0)
    xs = rng.normal(8.0, 2.0, args.points)
    ys = rng.normal(0.0, 0.01, args.points)
    ranges = (xs.min(), xs.max(), ys.min(), ys.max())
    w = gaussian_kernel(args.sigma)

    backends = [("python", _pykernels)]
    if _ckernels is not None:
        backends.append(("cython", _ckernels))
    else:
        print("compiled backend not built; timing the numpy fallback only", file=sys.stderr)

    print(f"points={args.points} bins={args.bins} sigma={args.sigma} kernel_width={len(w)}")
    print(f"{'backend':8s} {'bin (ms)':>10s} {'blur (ms)':>10s}")
    grids = {}
    timings = {}
    for name, impl in backends:
        counts = impl.bin_points(xs, ys, args.bins, *ranges)
        t_bin = min(timeit.repeat(lambda: impl.bin_points(xs, ys, args.bins, *ranges),
                                  number=1, repeat=args.repeat))
        t_blur = min(timeit.repeat(lambda: blur(impl, counts, w), number=1, repeat=args.repeat))
        grids[name] = blur(impl, counts, w)
        timings[name] = (t_bin, t_blur)
        print(f"{name:8s} {t_bin * 1e3:10.2f} {t_blur * 1e3:10.2f}")

    if len(grids) == 2:
        same = np.array_equal(grids["python"], grids["cython"])
        speed = timings["python"][1] / timings["cython"][1]
        print(f"identical grids: {same}; blur speedup {speed:.2f}x")
        return 0 if same else 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
