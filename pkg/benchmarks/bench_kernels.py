"""Compare the compiled and numpy backends of ``hermite_series_eval``.

    python benchmarks/bench_kernels.py [--points N] [--order M] [--repeat R]
"""

import argparse
import timeit

import numpy as np

from fpspec import _kernels_py
from fpspec.hermite import enumerate_indices

try:
    from fpspec import _kernels as compiled
except ImportError:
    compiled = None


def problem(d, order, points, seed=0):
    rng = np.random.default_rng(seed)
    alphas = np.array([a for k in range(order + 1) for a in enumerate_indices(d, k)], dtype=np.int64)
    coeffs = rng.normal(size=len(alphas))
    x = rng.uniform(-3, 3, size=(points, d))
    return alphas, coeffs, x


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--points", type=int, default=10_000)
    p.add_argument("--order", type=int, default=6)
    p.add_argument("--repeat", type=int, default=5)
    args = p.parse_args(argv)

    impls = {"python": _kernels_py.hermite_series_eval}
    if compiled is not None:
        impls["cython"] = compiled.hermite_series_eval
    else:
        print("compiled extension not built; timing the numpy backend only")

    print(f"{'d':>2} {'terms':>6} {'backend':>8} {'best [ms]':>10} {'speedup':>8}")
    for d in (1, 2, 3):
        args_ = problem(d, args.order, args.points)
        ref = _kernels_py.hermite_series_eval(*args_)
        base = None
        for name, fn in impls.items():
            assert np.allclose(fn(*args_), ref, rtol=1e-12, atol=1e-10)
            best = min(timeit.repeat(lambda: fn(*args_), number=1, repeat=args.repeat)) * 1e3
            base = base or best
            print(f"{d:>2} {len(args_[0]):>6} {name:>8} {best:>10.3f} {base / best:>8.2f}")


if __name__ == "__main__":
    main()
