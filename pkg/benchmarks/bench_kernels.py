"""Time the bitmask kernels under numba and under the numpy fallback.

The numpy side runs in a child process with DBEXPLAIN_DISABLE_NUMBA=1 since
the backend is fixed at import time.

    python benchmarks/bench_kernels.py [--repeat 5]
"""
import argparse
import json
import os
import subprocess
import sys
import time

import numpy as np


def cases():
    from dbexplain import kernels

    rng = np.random.default_rng(0)
    out = {}
    for n in (16, 20, 22):
        masks = np.array([rng.choice(n, 3, replace=False) for _ in range(n)])
        masks = np.array([sum(1 << int(i) for i in m) for m in masks], dtype=np.int64)
        table = kernels.truth_table(masks, n)
        out[f"truth_table n={n}"] = lambda m=masks, n=n: kernels.truth_table(m, n)
        out[f"marginal_counts n={n}"] = lambda t=table, n=n: kernels.marginal_counts(t, n, 0)
        out[f"hitting_sets n={n}"] = lambda m=masks, n=n: kernels.minimal_hitting_sets(m, n)
    n = 12
    indptr, indices = kernels.csr([[i, (i + 1) % n] for i in range(n)])
    perms = np.stack([np.random.default_rng([0, i]).permutation(n) for i in range(7380)])
    out["permutation_marginals m=7380"] = lambda: kernels.permutation_marginals(perms, indptr, indices, 0)
    return out


def measure(repeat):
    from dbexplain._accel import backend

    timings = {}
    for name, fn in cases().items():
        fn()  # compile / warm up
        best = float("inf")
        for _ in range(repeat):
            t = time.perf_counter()
            fn()
            best = min(best, time.perf_counter() - t)
        timings[name] = best
    return backend(), timings


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--child", action="store_true", help=argparse.SUPPRESS)
    args = ap.parse_args()
    if args.child:
        print(json.dumps(measure(args.repeat)))
        return
    env = dict(os.environ, DBEXPLAIN_DISABLE_NUMBA="1")
    child = subprocess.run(
        [sys.executable, __file__, "--child", "--repeat", str(args.repeat)],
        env=env, capture_output=True, text=True, check=True,
    )
    np_backend, np_times = json.loads(child.stdout)
    jit_backend, jit_times = measure(args.repeat)
    print(f"{'kernel':34s} {jit_backend:>10s} {np_backend:>10s} {'ratio':>7s}")
    for name in jit_times:
        a, b = jit_times[name], np_times[name]
        print(f"{name:34s} {a * 1e3:9.2f}ms {b * 1e3:9.2f}ms {b / a:7.1f}x")


if __name__ == "__main__":
    main()
