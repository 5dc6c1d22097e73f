"""Compare the compiled and pure-Python RK4 kernels.

Usage::

    python3 benchmarks/bench_kernels.py [--steps 20000] [--sizes 2 16 64] [--repeat 3]

Reports the best wall time per backend, the speed-up, and the largest
state difference between the two backends on the same problem.  A final
section runs several trajectories on a thread pool to show that the
compiled loop releases the GIL.
"""

import argparse
import time
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from hopgeo import kernels


def problem(n, seed=0):
    rng = np.random.default_rng(seed)
    A = rng.uniform(-1, 1, (n, n)) / np.sqrt(n)
    W = 0.5 * (A + A.T)
    d = rng.uniform(0.5, 2.0, n)
    b = rng.uniform(-0.5, 0.5, n)
    U0 = rng.uniform(-2, 2, n)
    return W, d, b, U0


def best_time(fn, repeat):
    best, out = np.inf, None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def run_affine(backend, W, d, b, U0, dt, steps):
    return kernels.integrate_affine(W, d, b, 0, 1.0, U0, dt, steps, 1e-300, 100, backend=backend)


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--steps", type=int, default=20000)
    parser.add_argument("--sizes", type=int, nargs="+", default=[2, 16, 64])
    parser.add_argument("--repeat", type=int, default=3)
    parser.add_argument("--threads", type=int, default=4)
    args = parser.parse_args(argv)

    try:
        kernels.get_backend("cython")
    except ImportError:
        print("compiled kernels are not built; only the Python backend is available")
        return 1

    dt = 1e-3
    print(f"integrate_affine, {args.steps} RK4 steps, dt = {dt}")
    print(f"{'n':>5} {'cython [s]':>12} {'python [s]':>12} {'speed-up':>10} {'max |dU|':>10}")
    for n in args.sizes:
        W, d, b, U0 = problem(n)
        tc, (rc, *_) = best_time(lambda: run_affine("cython", W, d, b, U0, dt, args.steps), args.repeat)
        tp, (rp, *_) = best_time(lambda: run_affine("python", W, d, b, U0, dt, args.steps), args.repeat)
        print(f"{n:>5} {tc:>12.4f} {tp:>12.4f} {tp / tc:>10.1f} {np.max(np.abs(rc - rp)):>10.1e}")

    steps = max(1, args.steps // 10)
    print(f"\nintegrate_affine_variational, {steps} steps")
    print(f"{'n':>5} {'cython [s]':>12} {'python [s]':>12} {'speed-up':>10} {'max |dM|':>10}")
    for n in args.sizes:
        W, d, b, U0 = problem(n)
        tc, (_, Mc, *_) = best_time(lambda: kernels.integrate_affine_variational(W, d, b, 0, 1.0, U0, dt, steps, backend="cython"), args.repeat)
        tp, (_, Mp, *_) = best_time(lambda: kernels.integrate_affine_variational(W, d, b, 0, 1.0, U0, dt, steps, backend="python"), args.repeat)
        print(f"{n:>5} {tc:>12.4f} {tp:>12.4f} {tp / tc:>10.1f} {np.max(np.abs(Mc - Mp)):>10.1e}")

    n = max(args.sizes)
    W, d, b, _ = problem(n)
    starts = [problem(n, seed)[3] for seed in range(args.threads * 2)]
    work = 5 * args.steps
    t0 = time.perf_counter()
    for U0 in starts:
        run_affine("cython", W, d, b, U0, dt, work)
    serial = time.perf_counter() - t0
    t0 = time.perf_counter()
    with ThreadPoolExecutor(args.threads) as pool:
        list(pool.map(lambda U0: run_affine("cython", W, d, b, U0, dt, work), starts))
    threaded = time.perf_counter() - t0
    print(f"\n{len(starts)} compiled trajectories (n = {n}, {work} steps): serial {serial:.3f} s, {args.threads} threads {threaded:.3f} s")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
