"""Benchmark the numba kernels against the pure-numpy fallbacks.

Runs each hot kernel on representative workloads and prints a table with
both paths plus end-to-end timings for forward sampling and the influence
loop. The numpy fallback is what you get with BNRISK_DISABLE_NUMBA=1.

Usage: python benchmarks/bench_kernels.py [--repeat 5]
"""

import argparse
import time

import numpy as np

import bnrisk as b
from bnrisk import _kernels as K
from bnrisk.params import initial_posterior


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def bench_family_counts(repeat):
    rng = np.random.default_rng(0)
    cards = np.array([2, 4, 3, 4, 2, 3], dtype=np.int64)
    codes = np.column_stack(
        [rng.integers(0, c, size=1_000_000).astype(np.int64) for c in cards]
    )
    sub = np.ascontiguousarray(codes)
    rows = []
    if K.USE_NUMBA:
        K._family_counts_nb(sub[:10], cards)  # compile outside the timing
        rows.append(("family_counts", "numba", best_of(lambda: K._family_counts_nb(sub, cards), repeat)))
    rows.append(("family_counts", "numpy", best_of(lambda: K._family_counts_np(sub, cards), repeat)))
    return rows, "1M rows x 6 columns"


def bench_categorical(repeat):
    rng = np.random.default_rng(1)
    table = rng.dirichlet(np.ones(4), size=64)
    cum = np.cumsum(table, axis=1)
    cfg = rng.integers(0, 64, size=1_000_000)
    u = rng.random(1_000_000)
    rows = []
    if K.USE_NUMBA:
        K._categorical_rows_nb(cum, cfg[:10], u[:10])
        rows.append(("categorical_rows", "numba", best_of(lambda: K._categorical_rows_nb(cum, cfg, u), repeat)))
    rows.append(("categorical_rows", "numpy", best_of(lambda: K._categorical_rows_np(cum, cfg, u), repeat)))
    return rows, "1M draws, 64 configs x 4 states"


def bench_prefix_mass(repeat):
    schema, dag = b.reference_crc_network()
    marg = {v.name: b.POPULATION_MARGINALS.normalized(v.name) for v in schema.variables}
    post = initial_posterior(b.build_prior(marg, b.PUBLISHED_ALPHA), schema, dag)
    net = b.posterior_mean_network(post)
    jt = b.JointTable(net)
    cards = schema.cardinalities
    rng = np.random.default_rng(2)
    row = np.array([rng.integers(0, c) for c in cards], dtype=np.int64)
    order = np.array([i for i in range(len(cards)) if i != 13], dtype=np.int64)
    rows = []
    if K.USE_NUMBA:
        K._prefix_mass_nb(jt.flat, cards, row, order, 13)
        rows.append(
            ("prefix_target_mass", "numba",
             best_of(lambda: K._prefix_mass_nb(jt.flat, cards, row, order, 13), repeat))
        )
    rows.append(
        ("prefix_target_mass", "numpy",
         best_of(lambda: K._prefix_mass_np(jt.flat, cards, row, order, 13), repeat))
    )
    return rows, "221,184-state joint, 13 evidence prefixes"


def bench_end_to_end(repeat):
    schema, dag = b.reference_crc_network()
    marg = {v.name: b.POPULATION_MARGINALS.normalized(v.name) for v in schema.variables}
    post = initial_posterior(b.build_prior(marg, b.PUBLISHED_ALPHA), schema, dag)
    net = b.posterior_mean_network(post)
    rows = [
        ("forward_sample(100k)", "active path",
         best_of(lambda: b.forward_sample(net, 100_000, seed=3), repeat)),
    ]
    pos = b.forward_sample(net, 50, seed=4)
    rows.append(
        ("influence 50x5", "active path",
         best_of(lambda: b.influential_findings(post, pos, "v_CRC", "yes", iterations=5, seed=5), repeat))
    )
    return rows, "14-variable reference network"


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()

    print(f"numba path active: {K.USE_NUMBA}")
    all_rows = []
    for bench in (bench_family_counts, bench_categorical, bench_prefix_mass, bench_end_to_end):
        rows, workload = bench(args.repeat)
        all_rows.extend((name, path, dt, workload) for name, path, dt in rows)
    width = max(len(r[0]) for r in all_rows)
    print(f"{'kernel'.ljust(width)}  {'path':12s}  {'best (ms)':>10s}  workload")
    for name, path, dt, workload in all_rows:
        print(f"{name.ljust(width)}  {path:12s}  {dt * 1e3:10.2f}  {workload}")


if __name__ == "__main__":
    main()
