"""Time the primal-dual sweep on each kernel backend.

Runs a fixed number of iterations (``tol = 0``) of the Condat-Vu variant
on generated lasso and QP problems and prints the median wall time per
backend together with the final residual, so the backends can be checked
for agreement as well as speed.

Usage::

    python benchmarks/bench_kernels.py --iters 2000 --repeat 5
"""
import argparse
import statistics
import time

import numpy as np

from afba import kernels
from afba.problems import gen_lasso, gen_strongly_convex_qp


def _cases(sizes):
    for n in sizes:
        yield f"lasso {n // 2}x{n}", gen_lasso(0, n // 2, n, formulation="pd").payload
        yield f"qp n={n}", gen_strongly_convex_qp(0, n=n, m=n // 2, with_h=True).payload


def _time(pb, backend, iters, repeat):
    g = 0.45 / pb.norm_L
    args = (pb.Ld, pb.f, pb.g, pb.h, pb.l_mu, g, g, 1.0, 0.0, np.zeros(pb.n), np.zeros(pb.m))
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        res = kernels.pd_sweep(*args, lam=0.5, max_iter=iters, tol_abs=0.0, backend=backend)
        times.append(time.perf_counter() - t0)
    return statistics.median(times), res


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--iters", type=int, default=2000)
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--sizes", type=lambda s: [int(v) for v in s.split(",")], default=[10, 40, 160])
    args = ap.parse_args(argv)

    backends = kernels.available_backends()
    print(f"backends: {', '.join(backends)}; {args.iters} iterations, median of {args.repeat}")
    print(f"{'case':<18}" + "".join(f"{b + ' [ms]':>16}" for b in backends) + f"{'speedup':>10}{'max |dx|':>12}")
    for label, pb in _cases(args.sizes):
        out = {b: _time(pb, b, args.iters, args.repeat) for b in backends}
        row = f"{label:<18}" + "".join(f"{1e3 * out[b][0]:16.2f}" for b in backends)
        if len(backends) == 2:
            speed = out["python"][0] / out["compiled"][0]
            dx = float(np.max(np.abs(out["python"][1].x - out["compiled"][1].x)))
            row += f"{speed:10.1f}x{dx:12.1e}"
        print(row)


if __name__ == "__main__":
    main()
