"""Time the numba kernels against the pure-numpy fallbacks.

    python benchmarks/bench_kernels.py [--repeat 5]
"""
import argparse
import time

import numpy as np

from demix import _kernels as K


def best_of(fn, repeat):
    fn()  # warm-up (and JIT compile)
    ts = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        ts.append(time.perf_counter() - t0)
    return min(ts)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    if K.numba is None:
        raise SystemExit("numba is not installed; nothing to compare")

    rng = np.random.default_rng(0)
    x = rng.standard_normal(1 << 21)
    rows = rng.standard_normal((40, 1 << 16))
    r = rng.normal(0, 1, 1 << 20)
    q = rng.random(1 << 20) * 1e-3
    out = np.empty_like(r)

    cases = [
        ("fwht 2^21", lambda: K._fwht_nb(x.copy()), lambda: K.fwht_numpy(x.copy())),
        ("fwht rows 40x2^16", lambda: K._fwht_rows_nb(rows.copy()), lambda: K.fwht_rows_numpy(rows.copy())),
        ("pme 2^20", lambda: K._pme_nb(q, r, 4.0, 1.1, out), lambda: K.pme_numpy(q, r, 4.0, 1.1)),
    ]
    print(f"{'kernel':<20}{'numba ms':>10}{'numpy ms':>10}{'speedup':>9}")
    for name, nb, npy in cases:
        a, b = best_of(nb, args.repeat), best_of(npy, args.repeat)
        print(f"{name:<20}{a * 1e3:>10.1f}{b * 1e3:>10.1f}{b / a:>9.2f}")


if __name__ == "__main__":
    main()
