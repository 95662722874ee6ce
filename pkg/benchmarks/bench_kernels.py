"""Time one sLdG step with the compiled and the NumPy kernels.

    python3 benchmarks/bench_kernels.py [--order 4] [--rows 8] [--repeat 5]
"""

import argparse
import math
import timeit

import numpy as np

from kpsplit import _kernels
from kpsplit.dg import DGGrid
from kpsplit.sldg import CharSolverConfig, step_coeffs


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--order", type=int, default=4)
    ap.add_argument("--rows", type=int, default=8)
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--cfl", type=float, default=0.5, help="max |u| * tau / h")
    args = ap.parse_args()

    backends = ["python"] + (["cython"] if _kernels.compiled_backend is not None else [])
    cfg = CharSolverConfig("secant", 5)
    print(f"order={args.order} rows={args.rows} cfl={args.cfl}")
    print(f"{'cells':>8} " + " ".join(f"{b + ' [ms]':>15}" for b in backends) + f" {'speedup':>9}")
    for n in (256, 1024, 4096, 16384):
        grid = DGGrid.uniform(0.0, 2 * math.pi, n, args.order)
        phase = np.linspace(0, 1, args.rows)[:, None, None]
        c = np.sin(grid.nodes[None] + phase)
        tau = args.cfl * grid.h
        times = []
        for b in backends:
            t = min(timeit.repeat(lambda: step_coeffs(c, grid, tau, cfg, backend=b), number=1,
                                  repeat=args.repeat))
            times.append(1e3 * t)
        speed = times[0] / times[-1] if len(times) > 1 else float("nan")
        print(f"{n:>8} " + " ".join(f"{t:>15.3f}" for t in times) + f" {speed:>9.1f}")


if __name__ == "__main__":
    main()
