"""Time one SDNLM iteration with the numba and numpy backends.

    python benchmarks/bench_backends.py --sizes 64 128 256 --workers 1 4
"""
import argparse
import time

import numpy as np

from sdnlm import FilterConfig, sdnlm
from sdnlm._jit import HAVE_NUMBA
from sdnlm.phantom import simulate_phantom, stock_phantom


def best_of(fn, repeats):
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--sizes", type=int, nargs="+", default=[64, 128, 256])
    p.add_argument("--workers", type=int, nargs="+", default=[1, 4])
    p.add_argument("--repeats", type=int, default=3)
    p.add_argument("--eta", type=float, default=0.90)
    args = p.parse_args(argv)

    backends = ["numpy"] + (["numba"] if HAVE_NUMBA else [])
    cfg = FilterConfig(eta=args.eta)
    print(f"{'size':>6} {'backend':>8} {'workers':>8} {'seconds':>10} {'Mpix/s':>8} {'vs numpy':>9}")
    for size in args.sizes:
        img = simulate_phantom(stock_phantom(size), seed=0)
        reference = {}
        for backend in backends:
            sdnlm(img, cfg, backend=backend)  # compile / warm caches
            for workers in args.workers:
                t = best_of(lambda: sdnlm(img, cfg, workers=workers, backend=backend), args.repeats)
                if backend == "numpy":
                    reference[workers] = t
                ratio = reference.get(workers, np.nan) / t
                print(f"{size:>6} {backend:>8} {workers:>8} {t:>10.4f} {size * size / t / 1e6:>8.3f} {ratio:>8.1f}x")
        if len(backends) == 2:
            a = sdnlm(img, cfg, backend="numba").data
            b = sdnlm(img, cfg, backend="numpy").data
            print(f"{size:>6} max relative backend difference {np.abs(a - b).max() / np.abs(a).max():.1e}")


if __name__ == "__main__":
    main()
