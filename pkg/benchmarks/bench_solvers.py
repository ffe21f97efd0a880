"""Compiled vs pure-Python solver kernels on seeded random 3-SAT.

    python benchmarks/bench_solvers.py [--n 50 100] [--count 20] [--repeat 3]

Both backends are run on the same instances and parameterizations; the
decision counts must agree, so the timing ratio compares like with like.
"""

import argparse
import time

import numpy as np

from rlaf.generators import gen_3sat
from rlaf.solvers import HAVE_EXT, Parameterization, get_solver


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t)
    return min(times), out


def bench(solver, n, count, repeat, seed=0):
    solve = get_solver(solver)
    rng = np.random.default_rng(seed)
    cases = []
    for s in range(count):
        f = gen_3sat(n, seed + s)
        cases.append((f, Parameterization(np.exp(rng.normal(0, 0.5, n)), rng.integers(0, 2, n))))

    def run(backend):
        return [solve(f, p, backend=backend).decisions for f, p in cases]

    t_py, dec_py = best_of(lambda: run("python"), repeat)
    t_ext, dec_ext = best_of(lambda: run("cython"), repeat)
    if dec_py != dec_ext:
        raise AssertionError(f"{solver} n={n}: backends disagree on decision counts")
    return t_py, t_ext, float(np.mean(dec_py))


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, nargs="+", default=[50, 100])
    ap.add_argument("--count", type=int, default=20)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--solver", choices=["cdcl", "lookahead"], nargs="+", default=["cdcl", "lookahead"])
    args = ap.parse_args()
    if not HAVE_EXT:
        raise SystemExit("compiled kernels are not built; run `pip install -e . --no-build-isolation`")

    print(f"{'solver':<10} {'n':>4} {'decisions':>10} {'python s':>10} {'cython s':>10} {'speedup':>8}")
    for solver in args.solver:
        for n in args.n:
            t_py, t_ext, dec = bench(solver, n, args.count, args.repeat)
            print(f"{solver:<10} {n:>4} {dec:>10.1f} {t_py:>10.4f} {t_ext:>10.4f} {t_py / t_ext:>7.1f}x")


if __name__ == "__main__":
    main()
