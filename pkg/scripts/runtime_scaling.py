"""Wall-clock of the RN and RO solvers on synthetic datasets of growing size.

    python3 scripts/runtime_scaling.py --sizes 5000 10000 20000 40000 --dim 50
"""

import argparse
import time

import numpy as np
from threadpoolctl import threadpool_limits

from relretro.core import RetrofitConfig, derive_params, retrofit_rn
from relretro.core.objective import RelationalOperator
from relretro.synthetic import synthetic_dataset


def best_of(fn, repeats):
    best = np.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[5000, 10000, 20000, 40000])
    ap.add_argument("--dim", type=int, default=50)
    ap.add_argument("--degree", type=float, default=6.0)
    ap.add_argument("--iterations", type=int, default=10)
    ap.add_argument("--repeats", type=int, default=5)
    ap.add_argument("--threads", type=int, default=1)
    args = ap.parse_args()

    cfg = RetrofitConfig(mode="RN", iterations=args.iterations)
    print(f"{'terms':>8} {'edges':>9} {'setup_s':>9} {'solve_s':>9} {'per_term_us':>12}")
    prev = None
    with threadpool_limits(limits=args.threads):
        for n in args.sizes:
            inst = synthetic_dataset(n, args.degree, args.dim, seed=0)
            params = derive_params(cfg, n, inst.groups)
            setup = best_of(lambda: RelationalOperator(params, inst.groups), args.repeats)
            solve = best_of(lambda: retrofit_rn(inst.W0, params, inst.categories, inst.groups, cfg), args.repeats)
            edges = sum(len(g) for g in inst.groups)
            ratio = "" if prev is None else f"  x{solve / prev:.2f}"
            print(f"{n:>8} {edges:>9} {setup:>9.4f} {solve:>9.4f} {1e6 * solve / n:>12.2f}{ratio}")
            prev = solve


if __name__ == "__main__":
    main()
