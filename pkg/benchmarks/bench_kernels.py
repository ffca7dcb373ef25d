"""Compare the compiled and numpy kernel backends.

Usage: python3 benchmarks/bench_kernels.py [--reps R] [--N N] [--repeat K]

For each law and kernel the script reports wall time per replicate for
both backends, the speedup, and whether the outputs agree.
"""
import argparse
import time

import numpy as np

from persistwalk import kernels
from persistwalk.laws import make_law
from persistwalk.rng import rep_keys, stream_key

LAWS = ["simple", "laplace", "geom2:q+=1/2,q-=1/2,a0=0", "lattice:{2:1/3,-1:2/3}", "normal"]


def best_of(fn, repeat):
    best, out = float("inf"), None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def same(a, b):
    a, b = (x if isinstance(x, tuple) else (x,) for x in (a, b))
    return all(np.allclose(x, y, rtol=1e-12, atol=1e-12, equal_nan=True) for x, y in zip(a, b))


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--reps", type=int, default=20000)
    ap.add_argument("--N", type=int, default=1024)
    ap.add_argument("--repeat", type=int, default=3)
    a = ap.parse_args(argv)
    if "cython" not in kernels.available_backends():
        print("compiled kernels not built; only the numpy backend is available")
        return 1
    keys = rep_keys(stream_key(1, "bench"), 0, a.reps)
    cases = {
        "walk_fail_times": lambda kl, b: kernels.walk_fail_times(kl, keys, a.N, 0, False, backend=b),
        "cycle_kernel": lambda kl, b: kernels.cycle_kernel(kl, keys, a.N, a.N, backend=b),
        "chain_kernel": lambda kl, b: kernels.chain_kernel(kl, keys, 8, a.N // 4, a.N, 0, backend=b),
    }
    print(f"reps={a.reps} N={a.N} (best of {a.repeat})")
    print(f"{'law':32s} {'kernel':16s} {'cython us/rep':>14s} {'numpy us/rep':>14s} {'speedup':>8s} agree")
    for spec in LAWS:
        kl = make_law(spec).kernel
        for name, fn in cases.items():
            tc, oc = best_of(lambda: fn(kl, "cython"), a.repeat)
            tp, op = best_of(lambda: fn(kl, "python"), a.repeat)
            print(f"{spec:32s} {name:16s} {1e6 * tc / a.reps:14.3f} {1e6 * tp / a.reps:14.3f} "
                  f"{tp / tc:8.1f} {same(oc, op)}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
