"""Time the numba and numpy stencil kernels on the desk-scale grids.

Run ``python benchmarks/bench_kernels.py``; add ``--solve`` to also time one
full implicit step of experiment 1 under each backend (in a subprocess, since
the backend is fixed at import time).
"""
import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from pennsfv import _kernels
from pennsfv.grid import GridSpec, build_grid

STEP = """
import time
from pennsfv import experiments as ex
from pennsfv.geometry import classify_cells
from pennsfv.scheme import step_implicit
defn = ex.get_experiment("exp1")
cfg = ex.CaseConfig.for_experiment(defn, {m}, 4.0 ** -4)
g = ex.grid_for_level({m})
s0, mask = ex.initial_state(defn, g), classify_cells(defn.shape, g)
step_implicit(s0, mask, cfg.fluid(), cfg.solver(g))
t = time.perf_counter()
step_implicit(s0, mask, cfg.fluid(), cfg.solver(g))
print(time.perf_counter() - t)
"""


def bench(n, reps):
    g = build_grid(GridSpec(2, n))
    rng = np.random.default_rng(0)
    rho = rng.uniform(0.5, 2, g.ncells)
    old = rng.uniform(0.5, 2, g.ncells)
    u = rng.standard_normal((2, g.ncells))
    mo = old * rng.standard_normal((2, g.ncells))
    mask = rng.uniform(size=g.ncells) < 0.7
    pen = np.where(mask, 0.0, 100.0)
    out = {}
    for name, impl in (("numba", _kernels.numba_impl), ("numpy", _kernels.numpy_impl)):
        calls = {
            "continuity_residual": lambda: impl.continuity_residual(rho, old, u, g.nbr, g.h, g.h ** 0.6, 0.01),
            "momentum_residual": lambda: impl.momentum_residual(rho, u, mo, pen, g.nbr, g.h, g.h ** 0.6,
                                                                 0.01, 1.0, 1.4, 0.1, 0.0),
            "laplace_h": lambda: impl.laplace_h(u, g.nbr, g.h),
        }
        for k, f in calls.items():
            f()  # compile / warm up
            out[(k, name)] = min(timeit.repeat(f, number=reps, repeat=3)) / reps
    return out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[20, 40, 80, 160])
    ap.add_argument("--reps", type=int, default=50)
    ap.add_argument("--solve", action="store_true")
    args = ap.parse_args()
    print(f"{'kernel':<22} {'n':>5} {'numba [us]':>12} {'numpy [us]':>12} {'speedup':>8}")
    for n in args.sizes:
        res = bench(n, args.reps)
        for k in ("continuity_residual", "momentum_residual", "laplace_h"):
            a, b = res[(k, "numba")] * 1e6, res[(k, "numpy")] * 1e6
            print(f"{k:<22} {n:>5} {a:12.1f} {b:12.1f} {b / a:8.2f}")
    if args.solve:
        for m in (2, 3):
            times = {}
            for backend in ("numba", "numpy"):
                env = dict(os.environ, PENNSFV_BACKEND=backend)
                r = subprocess.run([sys.executable, "-c", STEP.format(m=m)], env=env,
                                   capture_output=True, text=True, check=True)
                times[backend] = float(r.stdout.strip())
            print(f"implicit step exp1 m={m}: numba {times['numba']:.3f}s numpy {times['numpy']:.3f}s")


if __name__ == "__main__":
    main()
