"""Compare the compiled and numpy block kernels, and the solvers on top of them.

Usage::

    python benchmarks/bench_kernels.py [--repeat 20]

Each row reports the median over `repeat` calls. The solver section runs
CARM and CRM on one generated instance per size, with each backend plugged
into the ellipsoid stack in turn.
"""

import argparse
import statistics
import time

import numpy as np

from cfp import kernels, sets
from cfp.instances import derive_seed, gen_ellipsoids
from cfp.solvers import SolverConfig, solve

SIZES = [(10, 5), (10, 10), (50, 5), (50, 10), (100, 20)]


def _median_time(fn, repeat):
    times = []
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t)
    return statistics.median(times)


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=20)
    args = parser.parse_args()

    mods = kernels.available()
    if "cython" not in mods:
        print("compiled kernels not built; only the numpy backend is available")
    names = list(mods)
    print(f"{'n':>4} {'m':>4} {'kernel':8} " + " ".join(f"{name:>12}" for name in names) + "   speedup")
    for n, m in SIZES:
        inst = gen_ellipsoids(n, m, derive_seed(0, n, m, 0))
        stack = sets.EllipsoidStack(inst.A, inst.b, inst.alpha)
        X = np.ascontiguousarray(np.tile(inst.x0, (m, 1)))
        for label, call in (
            ("cut", lambda mod: mod.cut_blocks(stack.A, stack.b, stack.alpha, X, np.empty_like(X), np.empty(m))),
            (
                "project",
                lambda mod: mod.project_blocks(
                    stack.A, stack.b, stack.alpha, X, np.empty_like(X), sets.NEWTON_TOL, sets.NEWTON_MAX_ITER
                ),
            ),
        ):
            t = {name: _median_time(lambda: call(mod), args.repeat) for name, mod in mods.items()}
            speed = f"{t['python'] / t['cython']:9.1f}x" if "cython" in t else ""
            print(f"{n:4d} {m:4d} {label:8} " + " ".join(f"{t[k]:12.3e}" for k in names) + f"   {speed}")
        problem = inst.problem()
        x0 = inst.lifted_x0()
        for method in ("carm", "crm"):
            t = {}
            for name in mods:
                with kernels.use(name):
                    t[name] = _median_time(lambda: solve(problem, SolverConfig(method), x0), max(3, args.repeat // 4))
            speed = f"{t['python'] / t['cython']:9.1f}x" if "cython" in t else ""
            print(f"{n:4d} {m:4d} {method:8} " + " ".join(f"{t[k]:12.3e}" for k in names) + f"   {speed}")


if __name__ == "__main__":
    main()
