#!/usr/bin/env python3
"""Head-to-head timing of the numba and numpy backends.

Times the two hot kernels (the annihilation sweep and the crossing-cluster
contraction) in isolation and a full sixth-moment computation end to end.

    python benchmarks/bench_backends.py [--cells N] [--repeats R]
"""

import argparse
import time

import numpy as np

import qlevy._accel as accel
from qlevy._accel import _numpy_impl
from qlevy.fock import ProcessSpec, vacuum_moment
from qlevy.grids import Grid, Interval
from qlevy.kernels import ExponentialKernel

try:
    from qlevy._accel import _numba_impl
except ImportError:
    _numba_impl = None


def timeit(fn, repeats):
    fn()  # warm up (numba compilation, caches)
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - start)
    return best


def bench_annihilation(impl, n_cells, repeats):
    rng = np.random.default_rng(0)
    n_rows = 40_000
    keys = rng.integers(1, n_cells + 1, size=(n_rows, 3)).astype(np.int64)
    vals = rng.standard_normal(n_rows)
    incell = np.ones(n_cells, dtype=np.bool_)
    qmat = np.full((n_cells, n_cells), 0.5)
    return timeit(
        lambda: impl.annihilation_candidates(keys, vals, incell, qmat, 0.01),
        repeats,
    )


def bench_contraction(impl, repeats):
    rng = np.random.default_rng(1)
    sizes = (24, 24, 24, 24)
    weights = [rng.standard_normal(s) for s in sizes]
    edges = [(0, 1), (0, 2), (1, 3), (2, 3)]
    mats = [rng.standard_normal((sizes[i], sizes[j])) for i, j in edges]
    return timeit(lambda: impl.contract_cluster(weights, edges, mats), repeats)


def bench_moment(impl, n_cells, repeats):
    spec = ProcessSpec(ExponentialKernel(0.5, 1.0), Grid(n_cells, 1.0))

    def run():
        accel.annihilation_candidates = impl.annihilation_candidates
        accel.contract_cluster = impl.contract_cluster
        return vacuum_moment(spec, Interval(0.0, 1.0), 6)

    return timeit(run, repeats)


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--cells", type=int, default=48)
    parser.add_argument("--repeats", type=int, default=5)
    args = parser.parse_args()

    impls = [("numpy", _numpy_impl)]
    if _numba_impl is not None:
        impls.append(("numba", _numba_impl))
    else:
        print("numba not importable; timing the numpy backend only")

    rows = []
    for name, impl in impls:
        rows.append(
            (
                name,
                bench_annihilation(impl, args.cells, args.repeats),
                bench_contraction(impl, args.repeats),
                bench_moment(impl, args.cells, args.repeats),
            )
        )
    # restore the import-time selection
    accel.annihilation_candidates = accel._active.annihilation_candidates
    accel.contract_cluster = accel._active.contract_cluster

    print(f"{'backend':<8} {'annihilation':>14} {'contraction':>14} {'moment n=6':>14}")
    for name, t_ann, t_con, t_mom in rows:
        print(f"{name:<8} {t_ann * 1e3:>11.3f} ms {t_con * 1e3:>11.3f} ms {t_mom * 1e3:>11.3f} ms")
    if len(rows) == 2:
        speedups = [rows[0][i] / rows[1][i] for i in (1, 2, 3)]
        print(
            f"{'speedup':<8} {speedups[0]:>13.2f}x {speedups[1]:>13.2f}x "
            f"{speedups[2]:>13.2f}x  (numpy time / numba time)"
        )


if __name__ == "__main__":
    main()
