"""Time the numba kernels against the numpy fallback and check they agree.

    python3 benchmarks/bench_kernels.py [--m 5] [--sample 20000] [--repeat 3]

Setting PLUMBKNOT_DISABLE_NUMBA=1 makes the library default to numpy; this
script calls both paths explicitly regardless.
"""
import argparse
import time

import numpy as np

from plumbknot import _accel
from plumbknot.combinatorics import osp_table
from plumbknot.complex import summaries
from plumbknot.kernels import coface_max, split_table, table_summaries


def best_of(fn, repeat):
    times = []
    out = None
    for _ in range(repeat):
        t = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t)
    return min(times), out


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--m", type=int, default=5)
    ap.add_argument("--sample", type=int, default=20000)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    if not _accel.USE_NUMBA:
        print("numba unavailable or disabled; timing numpy only")
    table = osp_table(args.m)
    rng = np.random.default_rng(args.seed)
    n = table.N ** 3
    ids = np.sort(rng.choice(n, size=min(args.sample, n), replace=False))

    paths = [False] + ([True] if _accel.USE_NUMBA else [])
    if _accel.USE_NUMBA:  # compile outside the timed region
        table_summaries(table, ids[:10], use_numba=True)
    res = {}
    for use in paths:
        t, out = best_of(lambda: table_summaries(table, ids, use_numba=use), args.repeat)
        res[use] = out
        print(f"cell_summaries  m={args.m} cells={len(ids):>8}  {'numba' if use else 'numpy'}: {t:8.4f} s")
    if len(res) == 2:
        agree = all(np.array_equal(a, b) for a, b in zip(res[False], res[True]))
        print(f"cell_summaries agree: {agree}")

    hits = summaries(args.m)[0]
    values = np.where(hits > 0, hits, -1).astype(np.int64)
    splits = split_table(table)
    sing = np.flatnonzero(hits > 0)
    sub = sing[rng.choice(len(sing), size=min(args.sample, len(sing)), replace=False)]
    if _accel.USE_NUMBA:
        coface_max(sub[:10], values, splits, table.N, use_numba=True)
    cres = {}
    for use in paths:
        t, out = best_of(lambda: coface_max(sub, values, splits, table.N, use_numba=use), args.repeat)
        cres[use] = out
        print(f"coface_max      m={args.m} cells={len(sub):>8}  {'numba' if use else 'numpy'}: {t:8.4f} s")
    if len(cres) == 2:
        print(f"coface_max agree: {np.array_equal(cres[False], cres[True])}")


if __name__ == "__main__":
    main()
