"""Time the numba kernels against the pure-numpy fallbacks.

    python3 benchmarks/bench_kernels.py [--repeat 5]

Both paths are called directly from ``qlap._kernels`` so one process can
compare them; the environment flag QLAP_NUMBA only picks the default.
"""

from __future__ import annotations

import argparse
import timeit

import numpy as np

from qlap import _kernels, corpus
from qlap.evolution import TWO_PI, edge_exponential
from qlap.graph import build_laplacian, normalize_laplacian, pad_to_power_of_two


def laplacian(n: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    a = np.triu(rng.random((n, n)) < 0.3, 1).astype(float)
    a += a.T
    return np.diag(a.sum(axis=1)) - a


def trotter_args(name: str, steps: int):
    lap = normalize_laplacian(build_laplacian(pad_to_power_of_two(corpus.load(name))))
    us = np.array([u for u, _ in lap.edges], dtype=np.int64)
    vs = np.array([v for _, v in lap.edges], dtype=np.int64)
    block = np.eye(lap.dim, dtype=np.complex128)
    beta = edge_exponential(TWO_PI / (lap.divisor * steps))
    return block, us, vs, beta, steps


def best(fn, repeat: int) -> float:
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()
    if _kernels.NUMBA_KERNELS is None:
        raise SystemExit("numba is not importable; nothing to compare")
    paths = {"numba": _kernels.NUMBA_KERNELS, "numpy": _kernels.NUMPY_KERNELS}

    cases = []
    for n in (16, 64, 128):
        a = laplacian(n, 1)
        cases.append((f"symeig n={a.shape[0]}", "symeig", (a,), False))
    for name, steps in (("barbell", 64), ("random_05", 64), ("random_05", 512)):
        cases.append((f"trotter_rows {name} r={steps}", "trotter_rows",
                      trotter_args(name, steps), True))

    for _, kernel, call_args, mutates in cases:  # warm the JIT
        paths["numba"][kernel](*[x.copy() if isinstance(x, np.ndarray) else x for x in call_args],
                               *(((False,)) if mutates else ()))

    print(f"{'case':34s} {'numba ms':>10s} {'numpy ms':>10s} {'speedup':>8s}")
    for label, kernel, call_args, mutates in cases:
        times = {}
        for tag, table in paths.items():
            fn = table[kernel]
            if mutates:
                block, us, vs, beta, steps = call_args
                times[tag] = best(lambda: fn(block.copy(), us, vs, beta, steps, False), args.repeat)
            else:
                times[tag] = best(lambda: fn(call_args[0].copy()), args.repeat)
        print(f"{label:34s} {times['numba'] * 1e3:10.3f} {times['numpy'] * 1e3:10.3f} "
              f"{times['numpy'] / times['numba']:8.1f}x")


if __name__ == "__main__":
    main()
