"""Compare the compiled and pure-Python edit-distance backends.

Usage: python benchmarks/bench_editdist.py [--pairs N] [--len L] [--repeats R]
"""

import argparse
import random
import statistics
import time

from hyprank import editdist
from hyprank import _editdist_py


def make_pairs(n, length, vocab=50, seed=0):
    rng = random.Random(seed)
    pairs = []
    for _ in range(n):
        a = [rng.randrange(vocab) for _ in range(rng.randint(1, length))]
        b = [rng.randrange(vocab) for _ in range(rng.randint(1, length))]
        pairs.append((a, b))
    return pairs


def bench(fn, pairs, repeats):
    times = []
    for _ in range(repeats):
        start = time.perf_counter()
        for a, b in pairs:
            fn(a, b)
        times.append(time.perf_counter() - start)
    return min(times), statistics.mean(times)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--pairs", type=int, default=2000)
    ap.add_argument("--len", dest="length", type=int, default=40)
    ap.add_argument("--repeats", type=int, default=5)
    args = ap.parse_args()

    pairs = make_pairs(args.pairs, args.length)

    backends = [("python", _editdist_py.levenshtein_ids)]
    if editdist.BACKEND == "cython":
        from hyprank import _editdist

        backends.append(("cython", _editdist.levenshtein_ids))
    else:
        print("compiled backend not available; benchmarking pure Python only")

    results = {}
    for name, fn in backends:
        sample = random.sample(pairs, 20)
        ref = [_editdist_py.levenshtein_ids(a, b) for a, b in sample]
        assert [fn(a, b) for a, b in sample] == ref, f"{name} disagrees"
        best, mean = bench(fn, pairs, args.repeats)
        results[name] = best
        print(f"{name:>7}: best {best * 1e3:8.2f} ms  mean {mean * 1e3:8.2f} ms "
              f"({args.pairs} pairs, max len {args.length})")

    if "cython" in results:
        print(f"speedup: {results['python'] / results['cython']:.1f}x")


if __name__ == "__main__":
    main()
