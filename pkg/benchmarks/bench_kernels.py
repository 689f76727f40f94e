"""Time the compiled and pure-Python kernel backends on the sweep hot paths.

    python3 benchmarks/bench_kernels.py [--n 60] [--k 3] [--repeat 5]
"""
import argparse
import math
import timeit

import numpy as np

from qlimit._backend import available_backends, get_kernels
from qlimit.dist import simplex_points
from qlimit.qcalc import log_qfactorial_table


def workloads(kernels, n, k, q):
    pts = simplex_points(n, k)
    log_thetas = -0.3 * n * math.log(q) * np.ones(k)
    log_q = math.log(q)
    lfact = np.asarray(log_qfactorial_table(n, q))
    denoms = np.stack([kernels.log_geom_denominators(lt, q, n) for lt in log_thetas])
    means, sds = kernels.qmultinomial_frames_batch(pts, n, log_thetas, q)
    return len(pts), {
        "logpmf grid": lambda: kernels.qmultinomial_logpmf_batch(pts, n, log_thetas, log_q, lfact, denoms),
        "frames": lambda: kernels.qmultinomial_frames_batch(pts, n, log_thetas, q),
        "approx": lambda: kernels.sw_log_approx_batch(pts, means, sds, q),
        "q-Pochhammer (inf)": lambda: kernels.log_qpochhammer(-0.5, q, -1, 1e-15, 10000),
    }


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--n", type=int, default=60)
    parser.add_argument("--k", type=int, default=3)
    parser.add_argument("--q", type=float, default=0.9)
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()

    backends = available_backends()
    timings = {}
    for name in backends:
        size, jobs = workloads(get_kernels(name), args.n, args.k, args.q)
        for label, fn in jobs.items():
            number = 1 if name == "python" else 10
            best = min(timeit.repeat(fn, number=number, repeat=args.repeat)) / number
            timings[label, name] = best

    print(f"n={args.n} k={args.k} q={args.q}: {size} simplex points, best of {args.repeat}")
    header = f"{'kernel':<20}" + "".join(f"{b:>14}" for b in backends)
    if len(backends) > 1:
        header += f"{'speedup':>10}"
    print(header)
    for label in jobs:
        row = f"{label:<20}" + "".join(f"{timings[label, b] * 1e3:>12.3f}ms" for b in backends)
        if len(backends) > 1:
            row += f"{timings[label, 'python'] / timings[label, 'cython']:>9.1f}x"
        print(row)


if __name__ == "__main__":
    main()
