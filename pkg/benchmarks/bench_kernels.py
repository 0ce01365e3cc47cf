"""Time the compiled kernels against the numpy fallback.

Run ``python benchmarks/bench_kernels.py [--sizes 256,512,1024] [--threads 1]``.
Each kernel is timed on both backends with identical inputs, and the
largest relative difference between their outputs is reported.
"""

import argparse
import timeit

import numpy as np

from hartree import _core_py
from hartree.radial import make_grid

try:
    from hartree import _core
except ImportError:
    _core = None


def _best(fn, repeat):
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def _rel(a, b):
    scale = np.max(np.abs(b))
    return float(np.max(np.abs(a - b)) / scale) if scale else 0.0


def cases(M, N, threads):
    g = make_grid(N, M=M)
    r = np.ascontiguousarray(g.nodes)
    t = np.ascontiguousarray(np.linspace(0.0, 0.999, 8 * M))
    a = np.ascontiguousarray(np.random.default_rng(0).random((M + 1, M + 1)))
    x = np.ascontiguousarray(np.random.default_rng(1).random(M + 1))
    yield "angular_integral", lambda m: m.angular_integral(t, N, threads)
    yield "pair_kernel", lambda m: m.pair_kernel(r, N, 4, threads)
    yield "row_matvec", lambda m: m.row_matvec(a, x, threads)


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--sizes", default="256,512,1024")
    p.add_argument("--n", type=int, default=5)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--repeat", type=int, default=3)
    args = p.parse_args(argv)
    if _core is None:
        print("compiled core not built; only the fallback is available")
    print(f"{'kernel':<18}{'M':>6}{'python s':>12}{'compiled s':>12}{'speedup':>9}{'rel diff':>11}")
    for M in (int(s) for s in args.sizes.split(",")):
        for name, call in cases(M, args.n, args.threads):
            tp = _best(lambda: call(_core_py), args.repeat)
            if _core is None:
                print(f"{name:<18}{M:>6}{tp:>12.4f}{'-':>12}{'-':>9}{'-':>11}")
                continue
            tc = _best(lambda: call(_core), args.repeat)
            diff = _rel(np.asarray(call(_core)), np.asarray(call(_core_py)))
            print(f"{name:<18}{M:>6}{tp:>12.4f}{tc:>12.4f}{tp / tc:>9.1f}{diff:>11.1e}")


if __name__ == "__main__":
    main()
