"""Benchmark the compiled kernel core against the NumPy fallback.

Usage: python benchmarks/bench_kernels.py [--nx 48 --ny 96 --nz 48]
"""

import argparse
import time

import numpy as np

from pkslab import _kernels_py

try:
    from pkslab import _kernels
    HAVE_CYTHON = True
except ImportError:
    _kernels = None
    HAVE_CYTHON = False


def timeit(fn, *args, repeat=30):
    fn(*args)  # warm up
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--nx", type=int, default=48)
    ap.add_argument("--ny", type=int, default=96)
    ap.add_argument("--nz", type=int, default=48)
    ap.add_argument("--repeat", type=int, default=30)
    args = ap.parse_args()

    nzh = args.nz // 2 + 1
    k1 = np.ascontiguousarray(np.fft.fftfreq(args.nx, 1.0 / args.nx))
    k2 = np.ascontiguousarray(np.fft.fftfreq(args.ny, 1.0 / args.ny))
    k3 = np.ascontiguousarray(np.arange(nzh, dtype=float))
    rng = np.random.default_rng(0)
    shape = (args.nx, args.ny, nzh)
    u = [np.ascontiguousarray(rng.standard_normal(shape)
                              + 1j * rng.standard_normal(shape))
         for _ in range(3)]

    print(f"grid {args.nx}x{args.ny}x{args.nz} "
          f"({args.nx * args.ny * nzh} modes), best of {args.repeat}")
    rows = []
    for name, fn_args in (
            ("diffusion_factor", (k1, k2, k3, 1.0, 1.05, 1e-3)),
            ("shear_ksq", (k1, k2, k3, 2.5)),
            ("leray_project", None)):
        if fn_args is None:
            t_py = timeit(lambda: _kernels_py.leray_project(
                u[0].copy(), u[1].copy(), u[2].copy(), k1, k2, k3, 2.5),
                repeat=args.repeat)
            t_cy = timeit(lambda: _kernels.leray_project(
                u[0].copy(), u[1].copy(), u[2].copy(), k1, k2, k3, 2.5),
                repeat=args.repeat) if HAVE_CYTHON else float("nan")
        else:
            t_py = timeit(getattr(_kernels_py, name), *fn_args,
                          repeat=args.repeat)
            t_cy = timeit(getattr(_kernels, name), *fn_args,
                          repeat=args.repeat) if HAVE_CYTHON else float("nan")
        rows.append((name, t_py, t_cy))

    print(f"{'kernel':20s} {'numpy [ms]':>12s} {'cython [ms]':>12s} "
          f"{'speedup':>8s}")
    for name, t_py, t_cy in rows:
        speed = t_py / t_cy if t_cy == t_cy else float("nan")
        print(f"{name:20s} {1e3 * t_py:12.3f} {1e3 * t_cy:12.3f} "
              f"{speed:8.2f}x")
    if not HAVE_CYTHON:
        print("compiled core unavailable; showing NumPy fallback only")

    # agreement check between the two backends
    if HAVE_CYTHON:
        a = _kernels_py.diffusion_factor(k1, k2, k3, 1.0, 1.05, 1e-3)
        b = _kernels.diffusion_factor(k1, k2, k3, 1.0, 1.05, 1e-3)
        ua = [x.copy() for x in u]
        ub = [x.copy() for x in u]
        _kernels_py.leray_project(*ua, k1, k2, k3, 2.5)
        _kernels.leray_project(*ub, k1, k2, k3, 2.5)
        dev = max(float(np.max(np.abs(a - b))),
                  max(float(np.max(np.abs(x - y)))
                      for x, y in zip(ua, ub)))
        print(f"backend agreement: max abs dev {dev:.3e}")


if __name__ == "__main__":
    main()
