"""Benchmark the compiled kernels against the pure-numpy reference.

Runs the two hot paths (codeword match counting, Viterbi decoding) on
simulation-sized inputs through both backends, checks the outputs agree
bit for bit, and prints the timings.

    python3 benchmarks/bench_kernels.py [--repeat N]
"""

import argparse
import time

import numpy as np

from tonedisc import codec, kernels
from tonedisc.kernels import py_impl


def best_of(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=7, help="timing repetitions")
    args = ap.parse_args()

    rng = np.random.default_rng(7)
    rows = []

    params = codec.make_params(p=199, n=11, k=1)
    book = codec.codebook(params)
    shifted = kernels.shifted_indices(book, np.arange(-2, 3), params.p)
    masks = (rng.random((256, params.n, params.p)) < 0.05).astype(np.uint8)
    ref = py_impl.match_counts_batch(masks, shifted)
    rows.append(("match_counts 256x199x5",
                 lambda: py_impl.match_counts_batch(masks, shifted),
                 lambda: kernels.match_counts_batch(masks, shifted), ref))

    llrs = rng.normal(size=(64, 2 * 262))
    ref_v = py_impl.viterbi_decode(llrs)
    rows.append(("viterbi 64x262",
                 lambda: py_impl.viterbi_decode(llrs),
                 lambda: kernels.viterbi_decode(llrs), ref_v))

    compiled = kernels.BACKEND == "cython"
    if not compiled:
        print("compiled backend not importable; timing the numpy reference only")
    print(f"{'kernel':<24} {'numpy':>10} {'compiled':>10} {'speedup':>8}")
    for name, slow, fast, ref_out in rows:
        t_slow = best_of(slow, args.repeat)
        if compiled:
            if not np.array_equal(fast(), ref_out):
                raise SystemExit(f"{name}: backend outputs disagree")
            t_fast = best_of(fast, args.repeat)
            print(f"{name:<24} {t_slow * 1e3:>8.2f}ms {t_fast * 1e3:>8.2f}ms "
                  f"{t_slow / t_fast:>7.1f}x")
        else:
            print(f"{name:<24} {t_slow * 1e3:>8.2f}ms {'-':>10} {'-':>8}")


if __name__ == "__main__":
    main()
